from fractions import Fraction

import pytest

from coalgpart.axioms import check_interface_axioms, three_valued, weight
from coalgpart.functors import BAG, DISTRIBUTION, GROUP, POWERSET, PolynomialInterface, PowersetInterface


def test_powerset_carrier_3():
    report = check_interface_axioms(POWERSET, 3)
    assert report.passed
    assert report.checked == 2**3 * 3**3


def test_group_carrier_3():
    report = check_interface_axioms(GROUP, 3, weights=[Fraction(k) for k in range(-2, 3)])
    assert report.passed
    assert report.checked == 5**3 * 3**3


@pytest.mark.parametrize("iface", [BAG, DISTRIBUTION, PolynomialInterface([0, 2, 1])])
def test_other_interfaces_small_carrier(iface):
    assert check_interface_axioms(iface, 3).passed


def test_weight_and_three_valued_on_powerset():
    t = frozenset({0, 1, 2})
    assert weight(POWERSET, {1, 2}, t) == (1, 2)
    assert three_valued(POWERSET, {1}, {1, 2}, t) == (True, True, True)


class SwappedPowerset(PowersetInterface):
    def update(self, labels, weight):
        w_s, v, w_rest = super().update(labels, weight)
        return w_rest, v, w_s


def test_swapped_update_is_caught():
    report = check_interface_axioms(SwappedPowerset(), 3)
    assert not report.passed
    assert report.counterexample is not None
    assert report.counterexample["equation"] == "update"
    assert "FAIL" in str(report)


def test_carrier_limit():
    with pytest.raises(ValueError):
        check_interface_axioms(POWERSET, 9)
