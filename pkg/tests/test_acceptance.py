"""End-to-end acceptance run: one test per verification check.

Each test prints a single pass/fail line with the measured numbers so a
plain pytest run doubles as a results table.
"""

from hiercorr.demo import CRITERIA

_BY_NAME = dict(CRITERIA)


def _run(name: str) -> None:
    passed, detail = _BY_NAME[name]()
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line)
    assert passed, line


def test_01_separable_information_bound():
    _run("separable-information-bound")


def test_02_ghz_ladder():
    _run("ghz-ladder")


def test_03_generic_pure_states():
    _run("generic-pure-states")


def test_04_independence_closed_form():
    _run("independence-closed-form")


def test_05_projection_identity():
    _run("projection-identity")


def test_06_dimension_formulas():
    _run("dimension-formulas")


def test_07_unit_basis():
    _run("unit-basis")


def test_08_feasibility_exhaustive():
    _run("feasibility-exhaustive")


def test_09_parity_kernel():
    _run("parity-kernel")


def test_10_maximizer_search():
    _run("maximizer-search")


def test_11_solver_triangle():
    _run("solver-triangle")
