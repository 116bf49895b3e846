import numpy as np
import pytest

from hilbertlab import blaschke as bl
from hilbertlab import fixtures as fx
from hilbertlab.errors import FrameDegeneracyError
from hilbertlab.hilbert import hilbert_norm_many
from hilbertlab.monge_ampere import solve_monge_ampere


def _klein_rel_error(sol, fld, mask):
    g = sol.grid
    g11, g12, g22 = fx.klein_tensor(g.X, g.Y)
    num = np.stack([fld.hb[..., 0] - g11, fld.hb[..., 1] - g12,
                    fld.hb[..., 1] - g12, fld.hb[..., 2] - g22], axis=-1)
    den = np.stack([g11, g12, g12, g22], axis=-1)
    return (np.linalg.norm(num[mask], axis=1)
            / np.linalg.norm(den[mask], axis=1))


class TestDiscTensor:
    def test_center_is_identity(self, solved):
        sol, fld = solved("disc", 1 / 64)
        g = sol.grid
        i0 = np.argmin(np.abs(g.xs))
        assert fld.hb[i0, i0, 0] == pytest.approx(1.0, abs=2e-3)
        assert fld.hb[i0, i0, 1] == pytest.approx(0.0, abs=2e-3)
        assert fld.hb[i0, i0, 2] == pytest.approx(1.0, abs=2e-3)

    def test_matches_klein_off_collar(self, solved):
        sol, fld = solved("disc", 1 / 64)
        rel = _klein_rel_error(sol, fld, fld.mask & sol.grid.eroded(3))
        assert rel.max() <= 0.02

    def test_positive_definite_and_symmetric_storage(self, solved):
        sol, fld = solved("disc", 1 / 64)
        lo, hi = fld.eigenvalue_range()
        assert lo > 0.0 and np.isfinite(hi)


class TestCurvature:
    def test_disc_constant_minus_one(self, solved):
        sol, fld = solved("disc", 1 / 64)
        m = fld.kappa_mask & sol.grid.eroded(3)
        k = fld.kappa[m]
        assert np.abs(k + 1.0).max() <= 0.02

    def test_triangle_flat(self, solved):
        sol, fld = solved("triangle", 1 / 64)
        m = fld.kappa_mask & sol.grid.eroded(3)
        k = fld.kappa[m]
        assert np.abs(k).max() <= 0.06

    @pytest.mark.parametrize("name", ["disc", "square", "triangle", "ellipse"])
    def test_calabi_pinching(self, solved, name):
        sol, fld = solved(name, 1 / 64)
        m = fld.kappa_mask & sol.grid.eroded(3)
        k = fld.kappa[m]
        assert k.min() >= -1.05 and k.max() <= 0.05


class TestUnimodularity:
    def test_disc_within_gate(self, solved):
        sol, fld = solved("disc", 1 / 64)
        assert bl.unimodularity_check(sol, fld) <= 2e-2

    def test_square_off_collar(self, solved):
        sol, fld = solved("square", 1 / 64)
        assert bl.unimodularity_check(sol, fld) <= 5e-2

    def test_rescaled_potential_detected(self, solved):
        import copy
        sol, _ = solved("disc", 1 / 64)
        scaled = copy.copy(sol)
        scaled.u = 1.3 * sol.u
        fld2 = bl.blaschke_from_embedding(scaled)
        dev = bl.unimodularity_check(scaled, fld2)
        # frame determinant scales by 1.3^-3
        assert dev >= 0.3


class TestComparisonBounds:
    @pytest.mark.parametrize("name", ["disc", "square", "triangle"])
    def test_benoist_hulin_two_sided(self, solved, name):
        sol, fld = solved(name, 1 / 64)
        g = sol.grid
        mask = fld.mask & g.eroded(3)
        pts = np.column_stack([g.X[mask], g.Y[mask]])
        ratios = []
        for k in range(8):
            th = np.pi * k / 8
            v = np.array([np.cos(th), np.sin(th)])
            f2 = hilbert_norm_many(sol.domain, pts, v) ** 2
            q = fld.quadratic_form(mask, v)
            ratios.append(f2 / q)
        r = np.concatenate(ratios)
        c_dom = max(r.max(), (1.0 / r).max())
        assert np.isfinite(c_dom) and c_dom < 100.0

    def test_rigidity_witness_on_square(self, solved):
        sol, fld = solved("square", 1 / 64)
        g = sol.grid
        mask = fld.mask & g.eroded(3)
        pts = np.column_stack([g.X[mask], g.Y[mask]])
        hi = lo = None
        for k in range(16):
            th = np.pi * k / 16
            v = np.array([np.cos(th), np.sin(th)])
            f2 = hilbert_norm_many(sol.domain, pts, v) ** 2
            ratio = fld.quadratic_form(mask, v) / f2    # h_B / h_H
            hi = max(hi or 0, ratio.max())
            lo = min(lo or np.inf, ratio.min())
        assert hi >= 1.02 and lo <= 0.98


def test_frame_degeneracy_guard(solved, monkeypatch):
    sol, _ = solved("disc", 1 / 64)
    monkeypatch.setattr(bl, "FRAME_COND_LIMIT", 1.0)
    with pytest.raises(FrameDegeneracyError):
        bl.blaschke_from_embedding(sol)


def test_sqrt_det_positive(solved):
    sol, fld = solved("square", 1 / 64)
    s = fld.sqrt_det()
    assert np.nanmin(s[fld.mask]) > 0.0
