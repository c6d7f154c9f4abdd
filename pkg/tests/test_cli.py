import csv
import io
import json

import pytest

from addcomplexity.cli import (
    COMPARE_HEADER,
    DIAGNOSE_HEADER,
    main,
    render_csv,
    run_compare,
    run_curve,
    run_diagnose,
    run_spectrum,
)
from addcomplexity.config import parse_config
from addcomplexity.errors import ConfigurationError

TWO = {
    "model": {
        "family": "explicit_list",
        "marginals": [{"lambda0": 1, "values": [0.5, 0.5]}, {"lambda0": 0.5, "values": [0.25, 0.25]}],
    },
    "eps": 0.5,
    "d_grid": {"list": [2]},
}
KOROBOV = {
    "model": {"family": "korobov_parametric", "c": 1, "tau": 0.5, "r": 0,
              "sigma_rule": {"kind": "log_affine", "s0": 2, "s1": 1}},
    "eps": 0.5,
    "d_grid": {"start": 1024, "end": 16384, "count": 5, "spacing": "log"},
}
HOMOGENEOUS = {
    "model": {"family": "homogeneous", "marginals": [{"lambda0": 1, "values": [0.5, 0.5]}]},
    "eps": [0.3, 0.5],
    "d_grid": {"list": [1, 4, 16]},
}


def with_(doc, **changes):
    out = json.loads(json.dumps(doc))
    for path, value in changes.items():
        node = out
        *head, last = path.split("__")
        for key in head:
            node = node[key]
        node[last] = value
    return out


def parse_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
    return str(p)


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config({"model": {"family": "korobov_parametric"}, "eps": 0.5, "d_grid": {"list": [3]}},
                           threads=1)
        m = cfg.model
        assert (m.c, m.tau, m.r, m.rho) == (1.0, 0.0, 0.0, 0.0)
        assert m.sigma_rule.kind == "log_affine"
        assert (cfg.method, cfg.term_cap, cfg.eps, cfg.d_grid) == ("exact", 100_000_000, (0.5,), (3,))

    def test_default_threads(self):
        assert parse_config(TWO).threads >= 1

    @pytest.mark.parametrize("doc", [
        with_(TWO, extra=1),
        with_(TWO, model__colour="red"),
        with_(TWO, d_grid={"list": [2], "step": 1}),
        with_(KOROBOV, model__sigma_rule={"kind": "affine", "s0": 3, "s1": 1, "s2": 0}),
    ])
    def test_unknown_keys_rejected(self, doc):
        with pytest.raises(ConfigurationError):
            parse_config(doc)

    def test_field_paths_in_errors(self):
        with pytest.raises(ConfigurationError, match="model.c"):
            parse_config(with_(KOROBOV, model__c=-1))
        with pytest.raises(ConfigurationError, match="eps.1"):
            parse_config(with_(KOROBOV, eps=[0.5, 1.5]))
        with pytest.raises(ConfigurationError, match="model.marginals.1"):
            parse_config(with_(TWO, model__marginals=[{"lambda0": 1, "values": [0.5]},
                                                      {"lambda0": 1, "values": [0.5, 0.6]}]))

    def test_malformed_json(self):
        with pytest.raises(ConfigurationError, match="malformed"):
            parse_config("{not json")

    def test_sigma_one_names_j(self):
        doc = with_(KOROBOV, model__sigma_rule={"kind": "affine", "s0": 1.5, "s1": -0.25},
                    d_grid={"list": [1, 5]})
        with pytest.raises(ConfigurationError, match="j=2"):
            parse_config(doc)

    def test_grid_expansion(self):
        cfg = parse_config(with_(KOROBOV, d_grid={"start": 1, "end": 10, "count": 30, "spacing": "log"}))
        assert cfg.d_grid == tuple(sorted(set(cfg.d_grid)))
        assert cfg.d_grid[0] == 1 and cfg.d_grid[-1] == 10
        lin = parse_config(with_(KOROBOV, d_grid={"start": 2, "end": 10, "count": 5}))
        assert lin.d_grid == (2, 4, 6, 8, 10)
        assert parse_config(with_(KOROBOV, d_grid={"list": [5, 1, 5]})).d_grid == (1, 5)

    def test_grid_errors(self):
        with pytest.raises(ConfigurationError):
            parse_config(with_(KOROBOV, d_grid={"start": 10, "end": 1, "count": 3}))
        with pytest.raises(ConfigurationError):
            parse_config(with_(KOROBOV, d_grid={"list": []}))
        with pytest.raises(ConfigurationError):
            parse_config(with_(TWO, d_grid={"list": [3]}))

    def test_explicit_cycle(self):
        cfg = parse_config(with_(TWO, model__cycle=True, d_grid={"list": [5]}))
        assert cfg.d_grid == (5,)

    def test_homogeneous_method_needs_homogeneous_model(self):
        with pytest.raises(ConfigurationError):
            parse_config(with_(TWO, method="homogeneous"))

    def test_bounded_tau_accepted(self):
        cfg = parse_config(with_(KOROBOV, model__tau=1.5, method="asymptotic", d_grid={"list": [10]}), threads=1)
        header, rows = run_curve(cfg)
        assert rows[0][header.index("flag")] == "bounded"


class TestRunners:
    def test_compare_two_marginal(self):
        header, rows = run_compare(parse_config(TWO, threads=1))
        assert header == COMPARE_HEADER
        row = dict(zip(header, rows[0]))
        assert (row["n_exact"], row["n_reduced"], row["n_integral"]) == (3, 2, 2)

    def test_compare_regime_row(self):
        header, rows = run_compare(parse_config(with_(TWO, eps=0.75), threads=1))
        row = dict(zip(header, rows[0]))
        assert row["n_exact"] == 1
        assert "regime:n=1" in row["flag"].split(";")
        assert row["n_reduced"] is None

    def test_compare_korobov_ratio(self):
        header, rows = run_compare(parse_config(KOROBOV, threads=4))
        ratios = [r[header.index("ratio_exact_over_prediction")] for r in rows]
        assert [r[0] for r in rows] == [1024, 2048, 4096, 8192, 16384]
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
        assert abs(ratios[-1] - 1) < 0.05

    def test_curve_all_methods(self):
        cfg = parse_config(with_(HOMOGENEOUS, method="all"), threads=2)
        header, rows = run_curve(cfg)
        methods = [r[header.index("method")] for r in rows]
        assert methods[:5] == ["exact", "reduced", "integral", "homogeneous", "asymptotic"]
        by = {}
        for r in rows:
            by.setdefault((r[0], r[1]), {})[r[2]] = r[header.index("n")]
        for ns in by.values():
            assert ns["exact"] == ns["homogeneous"]
            assert ns["reduced"] == ns["integral"]

    def test_diagnose_homogeneous(self):
        header, rows = run_diagnose(parse_config(HOMOGENEOUS, threads=1))
        assert header == DIAGNOSE_HEADER
        eps_d = {r[1] for r in rows}
        assert max(eps_d) - min(eps_d) <= 1e-15

    def test_diagnose_korobov(self):
        doc = with_(KOROBOV, model__r=0.5, d_grid={"list": [10, 100, 1000]})
        header, rows = run_diagnose(parse_config(doc, threads=2))
        gaps = [abs(r[header.index("lambda0_ratio")] - 0.2) for r in rows]
        assert gaps[0] > gaps[1] > gaps[2]
        uj = [r[header.index("Uj_dist")] for r in rows]
        wd = [r[header.index("Wd_dist")] for r in rows]
        assert uj[0] > uj[-1] and wd[0] > wd[-1]

    def test_diagnose_bounded(self):
        doc = with_(KOROBOV, model__tau=2.0, d_grid={"list": [10, 100, 1000, 10000]})
        header, rows = run_diagnose(parse_config(doc, threads=1))
        sums = [r[header.index("trace_partial_sum")] for r in rows]
        inc = [b - a for a, b in zip(sums, sums[1:])]
        assert all(b < a for a, b in zip(inc, inc[1:]))
        assert rows[0][header.index("Wd_dist")] is None

    def test_spectrum(self):
        header, rows = run_spectrum(parse_config(TWO, threads=1), top=3)
        assert rows == [[1, 0.5, 1], [2, 0.5, 1], [3, 0.25, 2]]

    def test_csv_format(self):
        text = render_csv(["a", "b"], [[1, 0.1], [2, None]])
        assert text == "a,b\n1,0.10000000000000001\n2,\n"


class TestMain:
    def test_compare_stdout(self, tmp_path, capsys):
        assert main(["compare", "--config", write(tmp_path, TWO), "--threads", "1"]) == 0
        rows = parse_rows(capsys.readouterr().out)
        assert rows[0]["n_exact"] == "3"

    def test_out_file(self, tmp_path):
        out = tmp_path / "o.csv"
        assert main(["curve", "--config", write(tmp_path, HOMOGENEOUS), "--out", str(out)]) == 0
        data = out.read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")
        assert len(parse_rows(data.decode())) == 6

    def test_method_override(self, tmp_path, capsys):
        assert main(["complexity", "--config", write(tmp_path, HOMOGENEOUS), "--method", "homogeneous"]) == 0
        rows = parse_rows(capsys.readouterr().out)
        assert len(rows) == 1 and rows[0]["method"] == "homogeneous"

    def test_config_error(self, tmp_path, capsys):
        assert main(["curve", "--config", write(tmp_path, with_(TWO, bogus=1))]) == 2
        assert "bogus" in capsys.readouterr().err
        assert main(["curve", "--config", str(tmp_path / "missing.json")]) == 2
        assert main(["curve", "--config", write(tmp_path, TWO), "--method", "homogeneous"]) == 2

    def test_all_regime_exit(self, tmp_path, capsys):
        doc = with_(TWO, eps=0.75, method="reduced")
        assert main(["curve", "--config", write(tmp_path, doc)]) == 3
        # a single regime row among good ones is not an error
        doc = with_(TWO, eps=[0.5, 0.75], method="reduced")
        assert main(["curve", "--config", write(tmp_path, doc)]) == 0

    def test_term_cap_exit(self, tmp_path):
        doc = with_(KOROBOV, term_cap=10)
        assert main(["curve", "--config", write(tmp_path, doc)]) == 4

    def test_spectrum_top(self, tmp_path, capsys):
        assert main(["spectrum", "--config", write(tmp_path, TWO), "--top", "2"]) == 0
        assert len(parse_rows(capsys.readouterr().out)) == 2
        assert main(["spectrum", "--config", write(tmp_path, TWO), "--top", "0"]) == 2
