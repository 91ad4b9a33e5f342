"""Phase matching, spectra, polarization optics and tomography for type-II PPKTP sources."""

from ._core import (
    Crystal,
    Pump,
    accidental_rate,
    angle_wavelength_slope,
    bandwidth,
    brightness,
    center_wavelengths,
    coefficient_sets,
    coincidence_probability,
    compensator_delay,
    concurrence,
    degenerate_collinear_temperature,
    fidelity,
    group_index,
    hom_scan,
    length_scaling,
    linear_reconstruct,
    mle_reconstruct,
    noncollinear_emission_angle,
    partner_angle_slope,
    phase_fluctuation,
    phase_shifter,
    phi_state,
    projector_labels,
    purity,
    refractive_index,
    ring_ellipticity,
    run_cli,
    simulate_counts,
    spectral_rate,
    tuning_slope,
    waveplate,
    werner_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
