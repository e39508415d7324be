"""CLI flows for the exporter."""

import json

from maskexport.cli import main


def test_single_image_point(sample_images, tmp_path, capsys):
    rc = main(["--image", str(sample_images / "disk.ppm"),
               "--mode", "point", "--point", "32,32",
               "--out", str(tmp_path)])
    assert rc == 0
    printed = capsys.readouterr().out.strip()
    assert printed.endswith("disk.masks.json")
    doc = json.loads((tmp_path / "disk.masks.json").read_text())
    assert doc["prompt"] == "point:32,32"


def test_directory_everything(sample_images, tmp_path, capsys):
    rc = main(["--images-dir", str(sample_images),
               "--mode", "everything", "--max-masks", "4",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    for stem in ("disk", "grad", "rects"):
        assert (tmp_path / f"{stem}.masks.json").exists()


def test_box_flag_parsing_and_threshold(sample_images, tmp_path):
    rc = main(["--image", str(sample_images / "rects.ppm"),
               "--mode", "box", "--box", "0,0,64,64",
               "--threshold", "0.7", "--out", str(tmp_path)])
    assert rc == 0


def test_errors_exit_2(sample_images, tmp_path, capsys):
    # box mode without --box
    rc = main(["--image", str(sample_images / "disk.ppm"),
               "--mode", "box", "--out", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    # malformed point
    rc = main(["--image", str(sample_images / "disk.ppm"),
               "--mode", "point", "--point", "1;2", "--out", str(tmp_path)])
    assert rc == 2
    # empty directory
    empty = tmp_path / "none"
    empty.mkdir()
    rc = main(["--images-dir", str(empty), "--mode", "everything",
               "--out", str(tmp_path)])
    assert rc == 2
    # sam backend unavailable in this environment
    rc = main(["--image", str(sample_images / "disk.ppm"),
               "--mode", "point", "--point", "1,1",
               "--backend", "sam", "--sam-weights", "/tmp/none.pth",
               "--out", str(tmp_path)])
    assert rc == 2
