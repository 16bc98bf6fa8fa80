import numpy as np
import pytest
import torch

from reinfer_harness import cli, imageio, infer, train


@pytest.fixture(scope="module")
def trained(corpus, tmp_path_factory):
    ckpt = tmp_path_factory.mktemp("train") / "ckpt"
    model, losses = train(corpus["manifest"], epochs=4, seed=7, out_path=ckpt)
    return model, losses, ckpt


def test_loss_curve_decreases(trained):
    _, losses, _ = trained
    assert len(losses) == 4
    assert (np.diff(losses) < 0).all()
    assert losses[-1] < losses[0]


def test_same_seed_reproduces_curve(corpus):
    _, first = train(corpus["manifest"], epochs=3, seed=11)
    _, second = train(corpus["manifest"], epochs=3, seed=11)
    assert len(first) == len(second)
    assert np.abs(first - second).max() <= 1e-4


def test_too_few_pairs_rejected(corpus, tmp_path):
    rows = (corpus["manifest"]).read_text().splitlines()
    short = tmp_path / "short.csv"
    short.write_text("\n".join(rows[:3]) + "\n")
    with pytest.raises(ValueError, match="at least"):
        train(short, epochs=1)


def test_bad_epochs_and_batch_size(corpus):
    with pytest.raises(ValueError, match="epochs"):
        train(corpus["manifest"], epochs=0)
    with pytest.raises(ValueError, match="batch_size"):
        train(corpus["manifest"], epochs=1, batch_size=0)


def test_checkpoint_round_trip(trained):
    model, _, ckpt = trained
    loaded = infer.load_checkpoint(ckpt)
    x = torch.rand(1, 3, 48, 48, generator=torch.Generator().manual_seed(2))
    with torch.no_grad():
        assert torch.equal(model(x), loaded(x))


def test_missing_checkpoint_raises(tmp_path):
    with pytest.raises(Exception):
        infer.load_checkpoint(tmp_path / "absent")


def test_reinfer_outputs(trained, corpus, tmp_path):
    _, _, ckpt = trained
    out = tmp_path / "maps"
    count = infer.reinfer(ckpt, corpus["scenes"], out)
    assert count == 8
    files = sorted(out.iterdir())
    assert [f.name for f in files] == [f"scene_{i:04d}.sft" for i in range(8)]
    for f in files:
        arr = imageio.read_tensor(f)
        assert arr.dtype == np.float32
        assert arr.shape == (48, 48)
        assert arr.min() >= 0.0 and arr.max() <= 1.0


def test_reinfer_is_deterministic(trained, corpus, tmp_path):
    _, _, ckpt = trained
    a, b = tmp_path / "a", tmp_path / "b"
    infer.reinfer(ckpt, corpus["scenes"], a)
    infer.reinfer(ckpt, corpus["scenes"], b)
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_reinfer_flat_image_dir(trained, corpus, tmp_path):
    _, _, ckpt = trained
    flat = tmp_path / "flat"
    flat.mkdir()
    src = corpus["scenes"] / "scene_0000" / "image.ppm"
    (flat / "one.ppm").write_bytes(src.read_bytes())
    out = tmp_path / "maps"
    assert infer.reinfer(ckpt, flat, out) == 1
    assert (out / "one.sft").is_file()


def test_reinfer_empty_dir_rejected(trained, tmp_path):
    _, _, ckpt = trained
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(ValueError, match="no .ppm"):
        infer.reinfer(ckpt, empty, tmp_path / "maps")


def test_cli_train_and_infer(corpus, tmp_path, capsys):
    ckpt = tmp_path / "ckpt"
    rc = cli.train_main(
        ["--manifest", str(corpus["manifest"]), "--epochs", "2", "--out", str(ckpt)]
    )
    assert rc == 0
    assert "trained 2 epochs" in capsys.readouterr().out
    rc = cli.infer_main(
        ["--ckpt", str(ckpt), "--images", str(corpus["scenes"]),
         "--out", str(tmp_path / "maps")]
    )
    assert rc == 0
    assert "wrote 8 confidence maps" in capsys.readouterr().out


def test_cli_reports_failures(tmp_path, capsys):
    rc = cli.train_main(
        ["--manifest", str(tmp_path / "none.csv"), "--out", str(tmp_path / "ckpt")]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err
    rc = cli.infer_main(
        ["--ckpt", str(tmp_path / "none"), "--images", str(tmp_path),
         "--out", str(tmp_path / "maps")]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err
