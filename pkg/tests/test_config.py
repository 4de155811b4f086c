import pytest

from dprecon.config import ConfigError, RunConfig, parse, serialize


def test_round_trip():
    cfg = RunConfig(depth=3, filters=32, lam=1e-6, iterations=800, plateau_stop=True,
                    pattern="uniform2d", r="2x2", noise=0.001)
    assert parse(serialize(cfg)) == cfg
    assert parse(serialize(RunConfig())) == RunConfig()


def test_comments_and_lambda_key():
    cfg = parse("# header\nlambda = 0.5  # reg weight\n\n  filters=8\n")
    assert cfg.lam == 0.5 and cfg.filters == 8


def test_recon_config_mapping():
    rc = parse("depth = 3\nfilters = 16\nseed = 4\nlr = 0.01\n").recon_config()
    assert rc.unet.depth == 3 and rc.unet.filters == 16 and rc.unet.seed == 4
    assert rc.seed == 4 and rc.lr == 0.01


@pytest.mark.parametrize("text", ["filtres = 8", "lam = 1", "depth = three", "depth",
                                  "plateau_stop = maybe"])
def test_rejects_bad_input(text):
    with pytest.raises(ConfigError):
        parse(text)
