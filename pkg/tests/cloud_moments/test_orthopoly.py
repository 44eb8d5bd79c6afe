import pytest
from mpmath import mp

from cloud_moments.errors import DegreeTooHighError, NumericallySingularError
from cloud_moments.measure_lib import Atoms, Disk, EllipseJoukowski, UnitCircle, moments_of
from cloud_moments.orthopoly import christoffel, cd_kernel, gram_residual, orthonormalize, symbol_matrix

from tests.cloud_moments.helpers import assert_close, measure_fixture, policy


@pytest.fixture(scope="module")
def disk_basis():
    table = moments_of(Disk(radius=1.0), 24, policy(128))
    return table, orthonormalize(table, 24)


def test_disk_basis_is_scaled_monomials(disk_basis):
    _, basis = disk_basis
    with mp.workprec(128):
        for j in range(25):
            assert_close(basis.gamma[j], mp.sqrt((j + 1) / mp.pi), 1e-30, f"gamma_{j}")
            for k in range(j):
                assert_close(basis.coeff[j][k], 0, 1e-30, f"C[{j}][{k}]")


def test_diagonal_table_leading_coefficients(disk_basis):
    # 1/γ_n² = m[n][n] whenever the table is diagonal
    table, basis = disk_basis
    with mp.workprec(128):
        for n in (0, 5, 24):
            assert_close(1 / basis.gamma[n] ** 2, table.m(n, n), 1e-30, f"1/gamma_{n}^2")


@pytest.mark.parametrize(
    "name",
    ["disk.json", "disk_outliers.json", "ellipse4.json", "cardioid.json", "shifted_disk.json"],
)
def test_gram_residual_on_fixtures(name):
    p = policy(256)
    table = moments_of(measure_fixture(name), 12, p)
    basis = orthonormalize(table, 12)
    assert gram_residual(table, basis) <= p.band_tolerance
    assert all(g > 0 for g in basis.gamma)


def test_evaluate_matches_values():
    table = moments_of(EllipseJoukowski(rho=4.0), 6, policy())
    basis = orthonormalize(table, 6)
    z = 0.3 - 0.7j
    values = basis.values(z)
    with mp.workprec(128):
        for j in range(7):
            assert_close(basis.evaluate(j, z), values[j], 1e-30, f"p_{j}")


def test_singular_gram_is_reported():
    table = moments_of(Atoms(atoms=[(0j, 1.0), (1 + 0j, 1.0)]), 4, policy())
    with pytest.raises(NumericallySingularError) as info:
        orthonormalize(table, 3)
    assert info.value.at_degree == 2


def test_degree_limits():
    table = moments_of(UnitCircle(), 3, policy())
    with pytest.raises(DegreeTooHighError):
        orthonormalize(table, 4)
    basis = orthonormalize(table, 3)
    with pytest.raises(DegreeTooHighError):
        basis.values(0.5, 4)
    # ⟨z p_j, p_k⟩ needs one more degree than the table has
    with pytest.raises(DegreeTooHighError):
        symbol_matrix(table, basis, {(1, 0): 1}, 3, 3)


# ---------------------------------------------------------------------------
# Kernels and Christoffel functions
# ---------------------------------------------------------------------------


def test_unit_circle_kernel():
    basis = orthonormalize(moments_of(UnitCircle(), 3, policy()), 3)
    with mp.workprec(128):
        z, w = mp.mpc(2), mp.mpc(3)
        assert_close(cd_kernel(basis, 2, z, w), 1 + 6 + 36, 1e-30, "K_2(2, 3)")
        assert_close(christoffel(basis, 3, 0), 1, 1e-30, "Lambda_3(0)")


def test_christoffel_ratio_outside_disk(disk_basis):
    _, basis = disk_basis
    previous = christoffel(basis, 12, 1.5)
    for n in range(13, 25):
        current = christoffel(basis, n, 1.5)
        ratio = float(current / previous)
        assert abs(ratio - 4 / 9) <= 0.1 * 4 / 9, f"ratio at n={n}: {ratio}"
        previous = current


def test_christoffel_is_monotone(disk_basis):
    _, basis = disk_basis
    for z in (0, 0.5j, 0.9, 1.5 - 0.2j):
        values = [christoffel(basis, n, z) for n in range(10)]
        assert all(later <= earlier for earlier, later in zip(values, values[1:])), f"z={z}"


def test_disk_christoffel_at_centre_is_pi(disk_basis):
    _, basis = disk_basis
    with mp.workprec(128):
        for n in (0, 3, 12, 24):
            assert_close(christoffel(basis, n, 0), mp.pi, 1e-30, f"Lambda_{n}(0)")


@pytest.mark.parametrize("name", ["ellipse4.json", "cardioid.json", "shifted_disk.json"])
def test_kernel_is_hermitian(name):
    basis = orthonormalize(moments_of(measure_fixture(name), 8, policy()), 8)
    points = [0.3 + 0.1j, -0.5j, 1.2, -0.7 + 0.6j]
    with mp.workprec(128):
        for z in points:
            for w in points:
                assert_close(cd_kernel(basis, 8, z, w), mp.conj(cd_kernel(basis, 8, w, z)), 1e-20, f"K_8({z}, {w})")


@pytest.mark.parametrize("name", ["ellipse4.json", "cardioid.json", "shifted_disk.json"])
def test_kernel_reproduces_polynomials(name):
    n = 6
    table = moments_of(measure_fixture(name), n, policy(256))
    basis = orthonormalize(table, n)
    f = [mp.mpc(1), mp.mpc(0, 2), mp.mpc(0), mp.mpc(-0.5, 0.25)]
    with mp.workprec(256):
        for w in (mp.mpc(0.4, -0.2), mp.mpc(-1.1, 0.3)):
            pw = basis.values(w, n)
            # coefficients of K_n(·, w) in the monomials
            k = [mp.fsum(basis.coeff[j][t] * mp.conj(pw[j]) for j in range(t, n + 1)) for t in range(n + 1)]
            paired = mp.fsum(
                f[s] * mp.conj(k[t]) * table.entries[s][t] for s in range(len(f)) for t in range(n + 1)
            )
            assert_close(paired, mp.polyval(f[::-1], w), 1e-30, f"⟨f, K_{n}(·, {w})⟩")
