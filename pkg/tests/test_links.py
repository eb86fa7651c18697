import numpy as np
import pytest

from tlasso.errors import InvalidLinkError, NotSubGaussianError
from tlasso.links import (LinkFunction, apply_link, estimate_psi, gaussian_expect,
                          link_params, parse_link)

# Monte Carlo oracle values: 1e7 standard normal samples (seed 12345),
# mu = mean(f(g) g), sigma2 = mean((f(g) - mu g)^2), with standard errors.
CLIP_ORACLE = {
    0.5: (0.38310047, 1.00e-4, 0.03852811, 1.61e-5),
    1.0: (0.68304561, 2.12e-4, 0.05006151, 3.83e-5),
    2.0: (0.95528606, 3.86e-4, 0.00949702, 2.78e-5),
}

SIGN_MU = np.sqrt(2.0 / np.pi)
SIGN_SIGMA2 = 1.0 - 2.0 / np.pi
PSI_IDENTITY = np.sqrt(8.0 / 3.0)       # root of (1 - 2/t^2)^(-1/2) = 2
PSI_SIGN = 1.0 / np.sqrt(np.log(2.0))   # root of exp(1/t^2) = 2


def test_apply_identity():
    out = apply_link(LinkFunction("identity"), [0.5, -2.0])
    assert np.array_equal(out, [0.5, -2.0])


def test_apply_sign():
    out = apply_link(LinkFunction("sign"), [3.1, -0.2, 0.0])
    assert np.array_equal(out, [1.0, -1.0, 0.0])


def test_apply_clip():
    out = apply_link(LinkFunction("clip", param=1.0), [0.3, 2.5, -7.0])
    assert np.array_equal(out, [0.3, 1.0, -1.0])


def test_apply_elementwise_permutation():
    rng = np.random.default_rng(0)
    u = rng.standard_normal(50)
    perm = rng.permutation(50)
    link = LinkFunction("tanh_scaled", param=2.0)
    assert np.array_equal(apply_link(link, u)[perm], apply_link(link, u[perm]))


def test_tabulated_interpolation_and_validation():
    link = LinkFunction("tabulated", table=((-1.0, -2.0), (0.0, 0.0), (1.0, 2.0)))
    assert apply_link(link, [0.5])[0] == pytest.approx(1.0)
    assert apply_link(link, [5.0])[0] == pytest.approx(2.0)  # clamped beyond the table
    with pytest.raises(InvalidLinkError):
        LinkFunction("tabulated", table=((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(InvalidLinkError):
        LinkFunction("tabulated", table=((0.0, 1.0),))


def test_identity_params():
    p = link_params(LinkFunction("identity"))
    assert p.mu == pytest.approx(1.0, abs=1e-10)
    assert p.sigma == pytest.approx(0.0, abs=1e-10)


def test_sign_params():
    p = link_params(LinkFunction("sign"))
    assert p.mu == pytest.approx(SIGN_MU, abs=1e-6)
    assert p.sigma ** 2 == pytest.approx(SIGN_SIGMA2, abs=1e-6)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_clip_params_match_mc_oracle(tau):
    p = link_params(LinkFunction("clip", param=tau))
    mu_mc, mu_se, s2_mc, s2_se = CLIP_ORACLE[tau]
    assert abs(p.mu - mu_mc) <= 3 * mu_se
    assert abs(p.sigma ** 2 - s2_mc) <= 3 * s2_se


def test_orthogonal_decomposition():
    # sigma^2 + mu^2 = E f(g)^2 for every built-in
    for link in (LinkFunction("identity"), LinkFunction("sign"),
                 LinkFunction("clip", param=1.0), LinkFunction("tanh_scaled", param=3.0)):
        p = link_params(link, order=256)
        ef2 = gaussian_expect(lambda g: link(g) ** 2, link.kinks(), 256)
        assert p.sigma ** 2 + p.mu ** 2 == pytest.approx(ef2, abs=1e-8)


def test_mu_stable_under_order_doubling():
    for link in (LinkFunction("sign"), LinkFunction("tanh_scaled", param=1.0)):
        mus = [link_params(link, order=o).mu for o in (128, 256, 512)]
        assert abs(mus[0] - mus[1]) < 1e-9
        assert abs(mus[1] - mus[2]) < 1e-9


def test_psi_identity():
    assert estimate_psi(LinkFunction("identity")) == pytest.approx(PSI_IDENTITY, abs=1e-6)


def test_psi_sign():
    assert estimate_psi(LinkFunction("sign")) == pytest.approx(PSI_SIGN, abs=1e-6)


@pytest.mark.parametrize("tau", [0.3, 1.0, 2.0, 5.0])
def test_psi_clip_dominated_by_identity(tau):
    assert estimate_psi(LinkFunction("clip", param=tau)) <= PSI_IDENTITY + 1e-6


def test_cubic_not_sub_gaussian():
    with pytest.raises(NotSubGaussianError):
        estimate_psi(LinkFunction("cubic"))


def test_parse_link_grammar():
    assert parse_link("identity").kind == "identity"
    assert parse_link("clip:1.5").param == 1.5
    assert parse_link("tanh:0.7").kind == "tanh_scaled"
    with pytest.raises(InvalidLinkError):
        parse_link("spline:3")


def test_parse_table_file(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("-1 -1\n0 0\n1 1\n")
    link = parse_link(f"table:{path}")
    assert link.kind == "tabulated"
    assert apply_link(link, [0.25])[0] == pytest.approx(0.25)
