"""Acceptance criteria at full desk scale; each test prints one PASS/FAIL line."""

import numpy as np
import pytest

from twoweight import fw_characteristic
from twoweight.harness.suites import SUITES, SuiteConfig, _draw, check

CFG = SuiteConfig()


def report(capsys, number, text, ok):
    with capsys.disabled():
        print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'} {text}")


def run(capsys, number, *names):
    results = [check(name, CFG) for name in names]
    ok = all(r.passed for r in results)
    report(capsys, number, " | ".join(r.summary_line() for r in results), ok)
    return ok


@pytest.mark.slow
class TestAcceptance:
    def test_01_closed_form_anchor(self, capsys):
        assert run(capsys, 1, "anchor")

    def test_02_oracle_agreement(self, capsys):
        assert run(capsys, 2, "oracle")

    def test_03_scale_of_maximal_conditions(self, capsys):
        assert run(capsys, 3, "maximal-scale")

    def test_04_a_infinity_characterization(self, capsys):
        # the draws use omega = sigma, so both characteristics are one
        fw = [fw_characteristic(inst.sigma, inst.omega)
              for inst in (_draw(CFG, "a-infinity", i, 2.0, 0.5, same_measure=True) for i in range(200))]
        fw_ok = bool(np.allclose(fw, 1.0, rtol=1e-12))
        res = check("a-infinity", CFG)
        ok = fw_ok and res.passed
        report(capsys, 4, f"{res.summary_line()} | fw == 1 on all draws: {fw_ok}", ok)
        assert ok

    def test_05_maximal_pair(self, capsys):
        assert run(capsys, 5, "maximal-pair")

    def test_06_wolff(self, capsys):
        assert run(capsys, 6, "wolff")

    def test_07_holder_and_duality(self, capsys):
        assert run(capsys, 7, "holder-direction", "duality")

    def test_08_sparse_carleson(self, capsys):
        assert run(capsys, 8, "sparse")

    def test_09_multiplier(self, capsys):
        assert run(capsys, 9, "multiplier")

    def test_10_equivalent_expressions(self, capsys):
        assert run(capsys, 10, "equivalent-expressions")

    def test_11_hardy_littlewood(self, capsys):
        assert run(capsys, 11, "hl")

    def test_12_determinism(self, capsys, tmp_path):
        differing = []
        for name in SUITES:
            texts = []
            for run_id in ("a", "b"):
                out = tmp_path / run_id
                check(name, SuiteConfig(instances=5, out_dir=str(out)))
                texts.append((out / f"{name}.csv").read_bytes())
            if texts[0] != texts[1]:
                differing.append(name)
        ok = not differing
        report(capsys, 12, f"{len(SUITES)} suites run twice, byte-identical CSV: {ok} {differing or ''}", ok)
        assert ok
