import numpy as np
import pytest
from mpmath import mp

from cloud_moments.errors import (
    DegreeTooHighError,
    IllConditionedNullSpaceError,
    InvalidArgumentError,
    OutsideDomainOfValidityWarning,
    RankTestFailedError,
)
from cloud_moments.exptransform import (
    ExpTransformTable,
    ReconstructedDomain,
    boundary_residual,
    eval_series,
    pade_reconstruct,
    qd_rank_test,
    rational_b,
    series_to_b,
)
from cloud_moments.measure_lib import Disk, EllipseJoukowski, moments_of
from cloud_moments.workspace import Workspace, run_config

from tests.cloud_moments.helpers import assert_close, fixture_path, policy

CENTER = 0.5


@pytest.fixture(scope="module")
def disk_moments():
    # exact a_kl of the disk |z - 1/2| <= 1
    return moments_of(Disk(center=CENTER, radius=1.0), 20, policy()).entries


@pytest.fixture(scope="module")
def disk_domain(disk_moments):
    return pade_reconstruct(series_to_b(disk_moments, 1, policy()))


def _mp_table(rows):
    return ExpTransformTable(b=tuple(tuple(mp.mpc(x) for x in row) for row in rows), policy=policy())


# ---------------------------------------------------------------------------
# Series to b
# ---------------------------------------------------------------------------


def test_disk_b_is_rank_one(disk_moments):
    b = series_to_b(disk_moments, 3, policy())
    assert b.d == 3
    with mp.workprec(128):
        for m in range(4):
            for n in range(4):
                assert_close(b.b[m][n], CENTER ** (m + n), 1e-25, f"b[{m}][{n}]")


def test_zero_series_has_zero_b():
    b = series_to_b([[0, 0], [0, 0]], 1, policy())
    assert all(x == 0 for row in b.b for x in row)


def test_series_to_b_argument_checks(disk_moments):
    with pytest.raises(InvalidArgumentError):
        series_to_b(disk_moments, -1)
    with pytest.raises(DegreeTooHighError):
        series_to_b([row[:3] for row in disk_moments[:3]], 3)
    with pytest.raises(DegreeTooHighError):
        series_to_b(disk_moments, 1, policy()).block(2)


# ---------------------------------------------------------------------------
# Quadrature test
# ---------------------------------------------------------------------------


def test_disk_block_is_singular(disk_moments):
    test = qd_rank_test(series_to_b(disk_moments, 1, policy()))
    assert abs(test.determinant) <= 1e-12
    assert test.is_quadrature
    assert test.numerical_rank == 1
    assert test.singular_values[0] == pytest.approx(1.25)


def test_identity_block_is_not_quadrature():
    test = qd_rank_test(_mp_table([[1, 0], [0, 1]]))
    assert test.determinant == pytest.approx(1)
    assert not test.is_quadrature


def test_ellipse_is_not_a_quadrature_domain_of_order_one():
    a = moments_of(EllipseJoukowski(rho=4.0), 6, policy()).entries
    b = series_to_b(a, 1, policy())
    test = qd_rank_test(b)
    assert not test.is_quadrature
    assert test.numerical_rank == 2
    assert abs(test.determinant) > 1e-3
    with pytest.raises(RankTestFailedError):
        pade_reconstruct(b)


def test_ellipse_is_not_a_quadrature_domain_of_order_two():
    a = moments_of(EllipseJoukowski(rho=4.0), 8, policy(256)).entries
    test = qd_rank_test(series_to_b(a, 2, policy(256)))
    assert not test.is_quadrature
    assert min(test.singular_values) > 1e-10 * max(test.singular_values)


# ---------------------------------------------------------------------------
# Padé reconstruction
# ---------------------------------------------------------------------------


def test_disk_reconstruction(disk_domain):
    assert disk_domain.d == 1
    with mp.workprec(128):
        assert_close(disk_domain.P[0], -CENTER, 1e-25, "P0")
        assert_close(disk_domain.P[1], 1, 1e-30, "P1")
        assert_close(disk_domain.Q[0][0], 1, 1e-25, "Q00")
    assert disk_domain.nodes() == [pytest.approx(CENTER)]


def test_reconstruction_from_given_b_values():
    domain = pade_reconstruct(_mp_table([[1, 0.5], [0.5, 0.25]]))
    assert domain.nodes() == [pytest.approx(0.5)]
    with mp.workprec(128):
        assert_close(domain.Q[0][0], 1, 1e-25, "Q00")


def test_centred_disk_of_radius_two():
    a = moments_of(Disk(radius=2.0), 1, policy()).entries
    domain = pade_reconstruct(series_to_b(a, 1, policy()))
    with mp.workprec(128):
        assert_close(domain.P[0], 0, 1e-25, "P0")
        assert_close(domain.Q[0][0], 4, 1e-25, "Q00")


def test_reconstruction_needs_positive_order():
    with pytest.raises(InvalidArgumentError):
        pade_reconstruct(_mp_table([[1]]), d=0)


def test_oversized_order_has_degenerate_null_space(disk_moments):
    with pytest.raises(IllConditionedNullSpaceError):
        pade_reconstruct(series_to_b(disk_moments, 2, policy()))


def test_two_node_domain_is_recovered():
    # P = z² - 1, Q = 2 + w z̄
    given = ReconstructedDomain(
        P=(mp.mpc(-1), mp.mpc(0), mp.mpc(1)),
        Q=((mp.mpc(2), mp.mpc(0)), (mp.mpc(0), mp.mpc(1))),
        policy=policy(),
    )
    again = pade_reconstruct(rational_b(given, 2), tol=1e-20)
    with mp.workprec(128):
        for got, want in zip(again.P, given.P):
            assert_close(got, want, 1e-20, "P")
        for s in range(2):
            for t in range(2):
                assert_close(again.Q[s][t], given.Q[s][t], 1e-20, f"Q[{s}][{t}]")
    nodes = sorted(again.nodes(), key=lambda z: z.real)
    assert nodes == [pytest.approx(-1), pytest.approx(1)]


def test_rational_b_reproduces_the_series(disk_moments, disk_domain):
    exact = series_to_b(disk_moments, 3, policy())
    again = rational_b(disk_domain, 3)
    with mp.workprec(128):
        for m in range(4):
            for n in range(4):
                assert_close(again.b[m][n], exact.b[m][n], 1e-25, f"b[{m}][{n}]")


def test_boundary_residual_sign(disk_domain):
    assert boundary_residual(disk_domain, CENTER) == pytest.approx(-1)
    assert boundary_residual(disk_domain, 3) == pytest.approx(5.25)
    assert boundary_residual(disk_domain, 1.5) == pytest.approx(0, abs=1e-12)
    assert boundary_residual(disk_domain, CENTER + 1j) == pytest.approx(0, abs=1e-12)


# ---------------------------------------------------------------------------
# Truncated series
# ---------------------------------------------------------------------------


def test_series_matches_closed_form_far_away(disk_moments):
    w, z = 6 + 0j, 6j
    value = complex(eval_series(disk_moments, z, w, policy=policy()))
    expected = 1 - 1 / ((w - CENTER) * (np.conj(z) - CENTER))
    assert value == pytest.approx(expected, abs=1e-8)


def test_first_order_truncation_on_unit_disk():
    a = moments_of(Disk(radius=1.0), 1, policy()).entries
    value = complex(eval_series(a, 2, 2, policy=policy()))
    assert abs(value - 0.75) <= 0.05
    assert value.imag == pytest.approx(0)


def test_series_warns_inside_support(disk_moments):
    with pytest.warns(OutsideDomainOfValidityWarning):
        eval_series(disk_moments, CENTER, 6, radius=1.5, policy=policy())


def test_domain_transform_matches_the_series_far_away(disk_moments, disk_domain):
    w, z = 6 + 0j, 6j
    with mp.workprec(128):
        assert_close(disk_domain.transform(w, z), 1 - 1 / ((w - CENTER) * (mp.conj(z) - CENTER)), 1e-25, "F(w, z)")
    value = eval_series(disk_moments, z, w, policy=policy())
    assert complex(value) == pytest.approx(complex(disk_domain.transform(w, z)), abs=1e-8)


def test_workspace_series_uses_the_support_radius(disk_moments):
    workspace = Workspace(fixture_path("shifted_disk.json").parent)
    config = run_config(command="reconstruct", measure="shifted_disk.json", prec=128)
    assert workspace.support_radius(config) == pytest.approx(1.5)
    with pytest.warns(OutsideDomainOfValidityWarning):
        workspace.series_value(config, disk_moments, CENTER, 6)
    assert workspace.support_radius(run_config(command="reconstruct", cloud_moments="cloud.json")) is None


def test_one_minus_series_is_a_positive_kernel(disk_moments):
    points = [4 * np.exp(2j * np.pi * k / 5) + CENTER for k in range(5)] + [5j, -6 + 1j]
    kernel = np.array(
        [[1 - complex(eval_series(disk_moments, z, w, policy=policy())) for z in points] for w in points]
    )
    assert np.allclose(kernel, kernel.conj().T, atol=1e-8)
    eigenvalues = np.linalg.eigvalsh(kernel)
    assert eigenvalues.min() >= -1e-6 * eigenvalues.max()


# ---------------------------------------------------------------------------
# Estimated moments end to end
# ---------------------------------------------------------------------------


@pytest.mark.slow
def test_shifted_disk_node_from_estimated_moments():
    workspace = Workspace(fixture_path("shifted_disk.json").parent)
    config = run_config(command="reconstruct", measure="shifted_disk.json", d=1, n=24, N=50, tol=0.1, prec=256)
    output = workspace.reconstruct(config)
    assert output.is_quadrature
    assert len(output.nodes) == 1
    assert abs(output.nodes[0] - CENTER) <= 2e-2
    assert output.series_defect is not None
