"""Smoke test for the its_track_py extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml --release
"""

import cmath
import math

import its_track_py as it


def main():
    geo = it.Geometry(64, 30e9, [-1.0, 0.0, 0.0])
    assert geo.num_elements == 64
    assert abs(geo.element_positions[0] + 0.157392) < 1e-5

    a = geo.array_response(0.3)
    assert all(abs(abs(v) - 1.0) < 1e-12 for v in a)

    truth = it.ChannelState(5e-5, 0.4, 0.2)
    g = truth.channel(geo)
    h = geo.los_channel()
    codebook = geo.dft_codebook()
    assert len(codebook) == 64

    # two pilots through the beams closest to the true direction, no noise
    theta_bar = it.se_max_config(h, g)
    ranked = sorted(
        range(len(codebook)),
        key=lambda k: -abs(sum(c.conjugate() * t for c, t in zip(codebook[k], theta_bar))),
    )
    rows = [codebook[ranked[0]], codebook[ranked[1]]]
    y = [sum(t * hm * gm for t, hm, gm in zip(row, h, g)) for row in rows]

    priors = it.PriorSet(5e-5, 2e-6, 0.2, math.pi / 360, 0.4, 100.0)
    est = it.map_estimate(y, rows, h, 1.0, 1e-16, priors)
    assert est.converged
    assert abs(est.state.phi - truth.phi) < 1e-3, est.state
    assert abs(est.state.beta / truth.beta - 1.0) < 1e-2, est.state
    assert abs(cmath.phase(cmath.exp(1j * (est.state.omega - truth.omega)))) < 1e-2
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(est.trace, est.trace[1:]))

    se = it.spectral_efficiency(theta_bar, h, g, 1.0, 1e-12)
    assert se > 0.0

    sim = it.Simulator("map_myopic", "conservative", num_trials=4, num_blocks=10, snr_db=[0.0, 20.0], seed=3)
    rows = sim.run_monte_carlo()
    assert [r.snr_db for r in rows] == [0.0, 20.0]
    assert rows[1].nmse_channel < rows[0].nmse_channel
    assert all(r.mean_se <= r.mean_se_perfect_csi * (1 + 1e-12) for r in rows)
    trial = sim.run_trial(20.0, 0)
    assert len(trial.true_phi) == 10

    text = it.default_config()
    assert "num_trials" in text
    small = text.replace("num_trials = 1000", "num_trials = 2").replace("num_blocks = 50", "num_blocks = 4")
    tables = it.render_outputs(small)
    assert tables["nmse_vs_snr.csv"].startswith("snr_db,scheme,nmse_channel,nmse_aoa")

    try:
        it.Simulator("nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown scheme accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
