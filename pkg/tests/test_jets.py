import numpy as np
import pytest

from profinn import ConfigError, NumericalError, Tape
from profinn import jets as J

from fdcheck import central_d1, central_d2, rel_err


def scalar_jet(tape, value, d1, d2, dim=1):
    return J.Jet2(
        tape.constant(np.float64(value)),
        tuple(tape.constant(np.float64(c)) for c in d1),
        tuple(tape.constant(np.float64(c)) for c in d2),
        dim,
    )


def components(j):
    out = [float(j.value.value)]
    out += [float(c.value) for c in j.d1]
    out += [float(c.value) for c in j.d2]
    return out


class TestSeeding:
    def test_seed_1d(self):
        tape = Tape()
        j = J.seed_input(tape, 3.0, 0, 1)
        assert components(j) == [3.0, 1.0, 0.0]

    def test_seed_2d_axis1(self):
        tape = Tape()
        j = J.seed_input(tape, 0.0, 1, 2)
        assert float(j.value.value) == 0.0
        assert [float(c.value) for c in j.d1] == [0.0, 1.0]
        assert all(float(c.value) == 0.0 for c in j.d2)

    def test_seed_2d_axis0(self):
        tape = Tape()
        j = J.seed_input(tape, -2.5, 0, 2)
        assert float(j.value.value) == -2.5
        assert [float(c.value) for c in j.d1] == [1.0, 0.0]

    def test_seed_index_out_of_range(self):
        with pytest.raises(ConfigError):
            J.seed_input(Tape(), 1.0, 2, 2)
        with pytest.raises(ConfigError):
            J.seed_input(Tape(), 1.0, 0, 3)


class TestArithmetic:
    def test_mul_hand_leibniz(self):
        # d2 = a*b'' + 2 a' b' + a'' b = 2*2 + 2*21 + 1*5 = 51
        tape = Tape()
        a = scalar_jet(tape, 2, [3], [1])
        b = scalar_jet(tape, 5, [7], [2])
        assert components(J.jet_mul(a, b)) == [10.0, 29.0, 51.0]

    def test_add_linearity(self):
        tape = Tape()
        a = scalar_jet(tape, 1, [2], [3])
        b = scalar_jet(tape, 4, [5], [6])
        assert components(J.jet_add(a, b)) == [5.0, 7.0, 9.0]

    def test_div_constant_jets(self):
        tape = Tape()
        a = scalar_jet(tape, 1, [0], [0])
        b = scalar_jet(tape, 2, [0], [0])
        assert components(J.jet_div(a, b)) == [0.5, 0.0, 0.0]

    def test_div_by_zero_value(self):
        tape = Tape()
        a = scalar_jet(tape, 1, [0], [0])
        b = scalar_jet(tape, 0, [1], [0])
        with pytest.raises(NumericalError):
            J.jet_div(a, b)

    def test_dispatcher_matches_named_ops(self):
        tape = Tape()
        a = scalar_jet(tape, 1.5, [2.0], [-1.0])
        b = scalar_jet(tape, -0.5, [1.0], [3.0])
        for op, fn in [("add", J.jet_add), ("sub", J.jet_sub),
                       ("mul", J.jet_mul), ("div", J.jet_div)]:
            assert components(J.jet_arith(a, b, op)) == components(fn(a, b))
        with pytest.raises(ConfigError):
            J.jet_arith(a, b, "mod")


class TestElementary:
    def test_tanh_at_origin(self):
        tape = Tape()
        j = J.jet_tanh(J.seed_input(tape, 0.0, 0, 1))
        assert components(j) == [0.0, 1.0, 0.0]

    def test_sinh_at_origin(self):
        tape = Tape()
        j = J.jet_sinh(J.seed_input(tape, 0.0, 0, 1))
        assert components(j) == [0.0, 1.0, 0.0]

    def test_cube_by_hand(self):
        tape = Tape()
        j = J.jet_pow(J.seed_input(tape, 2.0, 0, 1), 3)
        assert components(j) == [8.0, 12.0, 12.0]

    def test_fractional_pow_domain_guard(self):
        tape = Tape()
        with pytest.raises(NumericalError):
            J.jet_pow(J.seed_input(tape, -1.0, 0, 1), 0.5)

    def test_affine(self):
        tape = Tape()
        j = J.jet_affine(J.seed_input(tape, 2.0, 0, 1), 3.0, -1.0)
        assert components(j) == [5.0, 3.0, 0.0]

    def test_elementary_dispatcher(self):
        tape = Tape()
        a = J.seed_input(tape, 0.7, 0, 1)
        assert components(J.jet_elementary(a, "tanh")) == components(J.jet_tanh(a))
        assert components(J.jet_elementary(a, "pow", alpha=2.0)) == components(J.jet_pow(a, 2.0))
        with pytest.raises(ConfigError):
            J.jet_elementary(a, "relu")


# Value maps used by the finite-difference sweep; each builds its output
# through the jet pipeline so the FD check certifies the jet rules.
def _pipeline(name):
    def build(tape, x_jets):
        a, = x_jets if len(x_jets) == 1 else (x_jets[0],)
        if name == "tanh":
            return J.jet_tanh(a)
        if name == "silu":
            return J.jet_silu(a)
        if name == "sinh":
            return J.jet_sinh(a)
        if name == "cosh":
            return J.jet_cosh(a)
        if name == "exp":
            return J.jet_exp(a)
        if name == "sigmoid":
            return J.jet_sigmoid(a)
        if name == "pow":
            return J.jet_pow(a, 1.7)
        if name == "affine":
            return J.jet_affine(a, -2.5, 0.75)
        raise AssertionError(name)
    return build


UNARY_RULES = ["tanh", "silu", "sinh", "cosh", "exp", "sigmoid", "pow", "affine"]


@pytest.mark.parametrize("name", UNARY_RULES)
def test_unary_rules_against_finite_differences(name):
    # d1 is checked against central differences of the value map; d2 against
    # central differences of the (now certified) d1 map. A direct second
    # difference at step 1e-5 sits on the float64 roundoff floor (~1e-6/h^2)
    # and cannot resolve a 1e-6 relative tolerance.
    rng = np.random.default_rng(hash(name) % 2 ** 32)
    lo, hi = (0.2, 3.0) if name == "pow" else (-3.0, 3.0)
    xs = rng.uniform(lo, hi, size=100)
    build = _pipeline(name)

    def value_map(x):
        tape = Tape()
        j = build(tape, [J.seed_input(tape, x[..., 0], 0, 1)])
        return j.value.value

    def d1_map(x):
        tape = Tape()
        j = build(tape, [J.seed_input(tape, x[..., 0], 0, 1)])
        return j.d1[0].value

    tape = Tape()
    j = build(tape, [J.seed_input(tape, xs, 0, 1)])
    x_col = xs[:, None]
    d1_fd = central_d1(value_map, x_col, 0)
    d2_fd = central_d1(d1_map, x_col, 0)
    assert rel_err(j.d1[0].value, d1_fd, floor=1e-4) <= 1e-6
    assert rel_err(j.d2[0].value, d2_fd, floor=1e-4) <= 1e-6


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_binary_rules_against_finite_differences(op):
    rng = np.random.default_rng(42)
    a_vals = rng.uniform(-3, 3, size=100)
    b_vals = rng.uniform(-3, 3, size=100)
    if op == "div":
        b_vals = np.sign(b_vals) * np.maximum(np.abs(b_vals), 0.5)

    def value_map(x):
        tape = Tape()
        ja = J.seed_input(tape, x[..., 0], 0, 2)
        jb = J.seed_input(tape, x[..., 1], 1, 2)
        return J.jet_arith(ja, jb, op).value.value

    def d1_map(axis):
        def f(x):
            tape = Tape()
            ja = J.seed_input(tape, x[..., 0], 0, 2)
            jb = J.seed_input(tape, x[..., 1], 1, 2)
            return J.jet_arith(ja, jb, op).d1[axis].value
        return f

    tape = Tape()
    ja = J.seed_input(tape, a_vals, 0, 2)
    jb = J.seed_input(tape, b_vals, 1, 2)
    out = J.jet_arith(ja, jb, op)

    x = np.column_stack([a_vals, b_vals])
    for axis in range(2):
        fd = central_d1(value_map, x, axis)
        assert rel_err(out.d1[axis].value, fd, floor=1e-4) <= 1e-6
    for t, (i, j) in enumerate(J.tri_pairs(2)):
        fd = central_d1(d1_map(i), x, j)
        assert rel_err(out.d2[t].value, fd, floor=1e-4) <= 1e-6


def test_seed_permutation_symmetry():
    # f(a, b) = a * tanh(b) + a^2 b, evaluated with swapped seed indices:
    # d1 permutes, d2 conjugates.
    def build(tape, a_jet, b_jet):
        t = J.jet_tanh(b_jet)
        return J.jet_add(J.jet_mul(a_jet, t),
                         J.jet_mul(J.jet_mul(a_jet, a_jet), b_jet))

    av, bv = 0.8, -1.3
    tape = Tape()
    out = build(tape, J.seed_input(tape, av, 0, 2), J.seed_input(tape, bv, 1, 2))
    tape2 = Tape()
    out_sw = build(tape2, J.seed_input(tape2, av, 1, 2), J.seed_input(tape2, bv, 0, 2))

    assert float(out.value.value) == float(out_sw.value.value)
    assert float(out.d1[0].value) == float(out_sw.d1[1].value)
    assert float(out.d1[1].value) == float(out_sw.d1[0].value)
    assert float(out.d2_entry(0, 0).value) == float(out_sw.d2_entry(1, 1).value)
    assert float(out.d2_entry(1, 1).value) == float(out_sw.d2_entry(0, 0).value)
    assert float(out.d2_entry(0, 1).value) == float(out_sw.d2_entry(0, 1).value)


def test_deriv_jet_shifts_components():
    tape = Tape()
    a = J.seed_input(tape, 1.2, 0, 1)
    cube = J.jet_pow(a, 3)
    d = J.deriv_jet(cube, 0)
    assert float(d.value.value) == pytest.approx(3 * 1.2 ** 2)
    assert float(d.d1[0].value) == pytest.approx(6 * 1.2)
    assert d.order == 1


def test_evaluations_bitwise_deterministic():
    rng = np.random.default_rng(11)
    xs = rng.uniform(-2, 2, size=64)

    def run():
        tape = Tape()
        a = J.seed_input(tape, xs, 0, 1)
        out = J.jet_silu(J.jet_mul(J.jet_tanh(a), a))
        return (out.value.value.copy(), out.d1[0].value.copy(), out.d2[0].value.copy())

    r1, r2 = run(), run()
    for x, y in zip(r1, r2):
        assert np.array_equal(x, y)
