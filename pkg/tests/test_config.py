import pytest

from spinsys.config import parse_config
from spinsys.errors import ConfigError
from spinsys.observables import ProductBernoulli
from spinsys.rate_models import Contact, Tabulated

FULL = """
[model]
kind = contact
dimension = 1
lambda_c = 1.5

[weights]
kind = polynomial
param = 1

[run]
seed = 3
replicas = 20
horizon = 0.5
window = 5
boxes = 1,2,4
times = 0.1,0.2
site = 1
sources = -2,2

[initial]
config = bg=period:10; dev=0

[function]
support = [0,1]
table = {00: 0, 01: 1, 10: 2, 11: 3}

[measure]
kind = product_bernoulli
p = 0.25
"""


def test_full_parse():
    cfg = parse_config(FULL)
    assert cfg.model == Contact(1.5)
    assert cfg.weights.kind == "polynomial"
    assert cfg.boxes == (1, 2, 4) and cfg.site == (1,)
    assert cfg.sources == ((-2,), (2,))
    assert cfg.function.table == (0, 1, 2, 3)
    assert cfg.measure == ProductBernoulli(0.25)
    assert cfg.initial[(0,)] == 0 and cfg.initial[(1,)] == 0 and cfg.initial[(2,)] == 1


def test_round_trip():
    cfg = parse_config(FULL)
    again = parse_config(cfg.to_text())
    assert again.to_text() == cfg.to_text()
    assert again.model == cfg.model and again.initial == cfg.initial


def test_tabulated_and_influence_round_trip():
    text = """
[model]
kind = tabulated
radius = 1
table = 000:0, 001:1, 010:1, 011:0, 100:1, 101:2, 110:0, 111:1
influence = -1:1, 1:1
"""
    cfg = parse_config(text)
    assert isinstance(cfg.model, Tabulated)
    assert cfg.model.influence().a_of((1,), (0,)) == 1
    assert parse_config(cfg.to_text()).model == cfg.model


def test_2d_sites():
    cfg = parse_config("[model]\nkind = voter\ndimension = 2\n[run]\nsite = (1,-1)\n")
    assert cfg.site == (1, -1)


@pytest.mark.parametrize("text, where", [
    ("[run]\nseed = 1\n", "file"),
    ("[model]\nkind = ising\n", "model.kind"),
    ("[model]\nkind = contact\n", "model.lambda_c"),
    ("[model]\nkind = contact\nlambda_c = x\n", "model.lambda_c"),
    ("[model]\nkind = voter\n[run]\nboxes = 3,1\n", "run.boxes"),
    ("[model]\nkind = voter\n[run]\nwindow = 1\nboxes = 1,2\n", "run.window"),
    ("[model]\nkind = voter\n[measure]\nkind = gibbs\n", "measure.kind"),
    ("[model]\nkind = voter\n[function]\nsupport = [0]\ntable = {0: 1}\n", "function.table"),
    ("[model]\nkind = voter\n[extra]\n", "file"),
    ("[model]\nkind = voter\nfoo = 1\n", "model"),
    ("not an ini file", "file"),
])
def test_errors_have_locations(text, where):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.location == where
