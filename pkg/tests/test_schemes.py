import math

import numpy as np
import pytest

from qudit_transfer.kernel import InvalidInputError
from qudit_transfer.schemes import (
    cluster_xi_unit, constructed_d3_scheme, count_distinct, deterministic_phase_set,
    make_scheme, nu_max, optimize_phases, power_of_two_phase_set,
    search_d3_cluster_preparation, snap_xi, sweep_expected_E, table1_row,
)
from qudit_transfer.states import TwoQubitResource

from reference_values import OPT_E_PSI

PI = math.pi


def test_phase_sets():
    assert deterministic_phase_set(8) == pytest.approx([PI / 4, PI / 2, PI])
    assert power_of_two_phase_set(3) == pytest.approx([PI, PI / 2])
    assert power_of_two_phase_set(3, [1, 0]) == pytest.approx([3 * PI, PI / 2])
    assert [nu_max(d) for d in (2, 3, 4, 5, 16, 17)] == [1, 2, 2, 3, 4, 5]
    with pytest.raises(InvalidInputError):
        power_of_two_phase_set(3, [0])


def test_count_distinct_chains():
    assert count_distinct([1.0, 1.0 + 6e-10, 1.0 + 1.2e-9, 2.0]) == 2
    assert count_distinct([]) == 0


def test_cluster_xi_rule():
    assert cluster_xi_unit(9) == 8
    assert snap_xi(20, 8) == 16
    with pytest.raises(InvalidInputError, match="xi-tuning rule"):
        table1_row(9, "cluster", 20)
    with pytest.raises(InvalidInputError):
        table1_row(3, "ghz")


def test_bell_row_independent_of_xi():
    a = table1_row(5, "bell", 0.0)
    b = table1_row(5, "bell", 3.7)
    assert a.expected_ebits == pytest.approx(b.expected_ebits, abs=1e-12)


def test_unconditional_probability_sums_to_one():
    st = make_scheme(6, TwoQubitResource.cluster(), power_of_two_phase_set(6)).stats(4)
    assert st.success_probability == pytest.approx(1.0)
    assert st.leaf_count == 4**3


def test_d8_deterministic_leaves():
    leaves = make_scheme(8, TwoQubitResource.psi_plus(), deterministic_phase_set(8)).leaves(20)
    assert len(leaves) == 64
    assert all(lf.probability == pytest.approx(1 / 64) for lf in leaves)
    assert all(lf.ebits == pytest.approx(3) for lf in leaves)


def test_constructed_scheme_warns_for_odd_xi():
    with pytest.warns(RuntimeWarning):
        sc = constructed_d3_scheme(1.0)
    assert sc.status == "warning"
    assert sc.predicted_shortfall > 1e-6
    with pytest.raises(InvalidInputError):
        constructed_d3_scheme(0.0, "phi+")


def test_sweep_peaks_at_multiples():
    rows = sweep_expected_E(8, TwoQubitResource.psi_plus(), 20, points=9)
    e = [r["expected_E"] for r in rows]
    # grid points 2 pi k / 8; k = 0 and 8 give no entanglement
    assert e[0] == pytest.approx(0, abs=1e-12)
    assert all(v == pytest.approx(1.0) for v in e[1:-1])
    assert rows[3]["accumulated"] == pytest.approx(rows[3]["phi"])
    with pytest.raises(InvalidInputError):
        sweep_expected_E(3, TwoQubitResource.psi_plus(), 0, points=1)


def test_optimizer_psi_unconditional():
    r = optimize_phases(3, TwoQubitResource.psi_plus(), 20, "expected")
    assert r.stats.expected_ebits == pytest.approx(OPT_E_PSI, abs=5e-4)
    assert r.objective >= r.seed_objective
    assert r.improved


def test_optimizer_rejects_bad_free_index():
    with pytest.raises(InvalidInputError):
        optimize_phases(3, TwoQubitResource.psi_plus(), free=[5])


def test_cluster_preparation_search():
    r = search_d3_cluster_preparation()
    assert r.residual < 1e-6
    assert r.phi * r.xi_unit == pytest.approx(PI)
    assert np.allclose(r.spectrum, [2 / 3, 1 / 3, 0], atol=1e-6)


def test_psi_optimum_reflection_symmetry():
    # phi2 -> 2 pi - phi2 leaves <E> unchanged, so both optima are equivalent
    res = TwoQubitResource.psi_plus()
    a = make_scheme(3, res, [2.673, 1.617]).stats(20).expected_ebits
    b = make_scheme(3, res, [2.673, 2 * PI - 1.617]).stats(20).expected_ebits
    assert a == pytest.approx(OPT_E_PSI, abs=5e-4)
    assert a == pytest.approx(b, abs=1e-12)
