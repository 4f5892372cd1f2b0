import math

import pytest

from wcavity.model import (
    BasisLabel,
    ParameterError,
    SystemParams,
    basis_index,
    basis_labels,
    check_density_matrix,
    density,
    validate_params,
)


class TestBasisIndex:
    @pytest.mark.parametrize(
        "label, expected",
        [
            (BasisLabel.vacuum(), 0),
            (BasisLabel.atom(3), 3),
            (BasisLabel.cavity(1), 5),
            (BasisLabel.fiber(), 9),
        ],
    )
    def test_canonical_order_n4(self, label, expected):
        assert basis_index(label, 4) == expected

    @pytest.mark.parametrize("n", [3, 4, 7, 32, 64])
    def test_bijection(self, n):
        idx = [basis_index(lab, n) for lab in basis_labels(n)]
        assert idx == list(range(2 * n + 2))

    @pytest.mark.parametrize("label", [BasisLabel.atom(0), BasisLabel.atom(5), BasisLabel.cavity(-1)])
    def test_out_of_range(self, label):
        with pytest.raises(ValueError, match="out of range"):
            basis_index(label, 4)


class TestSystemParams:
    def test_rejects_small_n(self):
        with pytest.raises(ParameterError, match="n_atoms"):
            SystemParams(2)

    @pytest.mark.parametrize("field", ["f", "nu", "delta", "gamma_atom", "gamma_cavity", "kappa"])
    def test_rejects_non_finite(self, field):
        with pytest.raises(ParameterError, match=field):
            SystemParams(4, **{field: math.inf})

    def test_rejects_zero_f(self):
        with pytest.raises(ParameterError):
            SystemParams(4, f=0.0)

    def test_rejects_negative_rate(self):
        with pytest.raises(ParameterError, match="kappa"):
            SystemParams(4, kappa=-0.1)


class TestValidateParams:
    def test_all_pass(self):
        report = validate_params(SystemParams(4, nu=10, delta=10), 5)
        assert report.ok
        assert report["delta_minus"].passed

    def test_near_pole_warns(self):
        report = validate_params(SystemParams(4, nu=10, delta=19.9), 5)
        assert not report.ok
        assert not report["delta_minus"].passed
        assert report["hopping_sign"].passed
        assert "0.1" in report["delta_minus"].message

    def test_wrong_side_of_pole_warns(self):
        report = validate_params(SystemParams(4, nu=10, delta=25), 5)
        assert not report["hopping_sign"].passed
        assert "eta_N <= 0" in report["hopping_sign"].message

    def test_small_delta_warns_with_default_ratio(self):
        # Fig. 3 range starts at 2f: below the default dispersive ratio
        assert not validate_params(SystemParams(4, nu=10, delta=2))["delta"].passed


def test_density_check_pure_state():
    import numpy as np

    psi = np.zeros(10, complex)
    psi[1] = psi[2] = 1 / np.sqrt(2)
    assert check_density_matrix(density(psi)).ok
