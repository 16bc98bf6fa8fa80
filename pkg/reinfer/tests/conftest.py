import shutil
import subprocess

import pytest

SCENE_COUNT = 8


@pytest.fixture(scope="session")
def saff_cli():
    path = shutil.which("saff")
    if path is None:
        pytest.skip("primary saff CLI not on PATH")
    return path


@pytest.fixture(scope="session")
def corpus(tmp_path_factory, saff_cli):
    """Small scene set with pseudo masks produced by the primary CLI.

    The harness talks to the segmenter only through its files, so the
    fixture shells out instead of importing it.
    """
    root = tmp_path_factory.mktemp("corpus")
    scenes = root / "scenes"
    seg = root / "seg"
    subprocess.run(
        [saff_cli, "synth", "--out", str(scenes), "--count", str(SCENE_COUNT),
         "--seed", "300", "--size", "48x48", "--noise", "0.2"],
        check=True, capture_output=True,
    )
    subprocess.run(
        [saff_cli, "segment", "--scenes", str(scenes), "--out", str(seg),
         "--superpixels", "64"],
        check=True, capture_output=True,
    )
    return {"scenes": scenes, "seg": seg, "manifest": seg / "manifest.csv"}
