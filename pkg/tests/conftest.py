import numpy as np
import pytest

import nhlattice as nh

PI_HALF = float(np.pi / 2)


@pytest.fixture(scope="session")
def fig2_run():
    """Gain-end emission at the singularity, canonical geometry."""
    spec = nh.LatticeSpec(kappa=1.0, g=1.0, gamma=0.5, n_sites=800,
                          topology=nh.Topology.FOLDED)
    packet = nh.WavePacketSpec(alpha=0.02, k=PI_HALF, center=401)
    trace = nh.emission_run(spec, packet, t_final=600.0, snapshot_times=(400.0,))
    return spec, packet, trace


@pytest.fixture(scope="session")
def fig4_run():
    spec = nh.LatticeSpec(kappa=1.0, g=1.0, gamma=-0.5, n_sites=800,
                          topology=nh.Topology.FOLDED)
    packet = nh.WavePacketSpec(alpha=0.02, k=PI_HALF, center=401)
    trace = nh.absorption_run(spec, packet, t_final=310.0)
    return spec, packet, trace


@pytest.fixture(scope="session")
def fig6_run():
    spec = nh.LatticeSpec(kappa=1.0, g=1.0, gamma=0.5, n_sites=800,
                          topology=nh.Topology.PT)
    packet = nh.WavePacketSpec(alpha=0.02, k=PI_HALF, center=400)
    trace = nh.pt_run(spec, packet, t_final=1600.0)
    return spec, packet, trace


@pytest.fixture(scope="session")
def alpha_sweep():
    """Platform height vs packet width at fixed critical gain."""
    out = []
    for alpha in (0.01, 0.02, 0.04):
        spec = nh.LatticeSpec(kappa=1.0, g=1.0, gamma=0.5, n_sites=1200,
                              topology=nh.Topology.FOLDED)
        packet = nh.WavePacketSpec(alpha=alpha, k=PI_HALF, center=601)
        trace = nh.emission_run(spec, packet, t_final=620.0)
        out.append((packet.fwhm, trace.platform_height))
    return out


@pytest.fixture(scope="session")
def gamma_sweep():
    """Platform height vs critical gain at fixed packet width."""
    out = []
    for g in (0.5, float(np.sqrt(0.5)), 1.0):
        gamma_c = g * g / 2.0
        spec = nh.LatticeSpec(kappa=1.0, g=g, gamma=gamma_c, n_sites=800,
                              topology=nh.Topology.FOLDED)
        packet = nh.WavePacketSpec(alpha=0.02, k=PI_HALF, center=401)
        trace = nh.emission_run(spec, packet, t_final=420.0)
        out.append((gamma_c, trace.platform_height))
    return out


@pytest.fixture(scope="session")
def deviation_g1():
    base = nh.LatticeSpec(kappa=1.0, g=1.0, gamma=0.5, n_sites=800,
                          topology=nh.Topology.FOLDED)
    packet = nh.WavePacketSpec(alpha=0.04, k=PI_HALF, center=201)
    rows = nh.deviation_study(base, packet, [0.0, 1e-4, -1e-4, 1e-3, -1e-3],
                              sigma=+1, t_star=900.0)
    return {r.delta: r for r in rows}
