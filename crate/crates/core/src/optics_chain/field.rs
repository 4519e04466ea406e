use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OpticsError;
use crate::signal_core::{tone_phase, unit_phasor, ComplexSignal, RealSignal, Signal, TimeGrid};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Forward (local to remote) channel, nm.
pub const LAMBDA_FORWARD_NM: f64 = 1550.1;
/// Return (remote to local) channel, nm.
pub const LAMBDA_RETURN_NM: f64 = 1549.3;

// Telecom O- through U-band.
const WAVELENGTH_RANGE_NM: (f64, f64) = (1260.0, 1675.0);

/// Optical field as a sampled complex envelope plus carrier bookkeeping.
///
/// The carrier itself (~194 THz) is never sampled. Delays applied to the field
/// add `ω_c·delay mod 2π` to `carrier_phase_offset`; interferometric
/// operations only ever see differences of this offset.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub envelope: ComplexSignal,
    pub wavelength_nm: f64,
    pub carrier_phase_offset: f64,
}

impl OpticalField {
    pub fn grid(&self) -> &TimeGrid {
        self.envelope.grid()
    }

    /// Optical carrier frequency in Hz.
    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)
    }

    pub fn intensity(&self) -> RealSignal {
        self.envelope.intensity()
    }

    pub(crate) fn with_envelope(&self, envelope: ComplexSignal) -> Self {
        Self { envelope, wavelength_nm: self.wavelength_nm, carrier_phase_offset: self.carrier_phase_offset }
    }

    /// Adds the carrier phase `ω_c·delay`, reduced into `[0, 2π)`.
    pub(crate) fn advance_carrier(&mut self, delay: f64) {
        let step = tone_phase(self.carrier_frequency(), delay);
        self.carrier_phase_offset = (self.carrier_phase_offset + step).rem_euclid(std::f64::consts::TAU);
    }
}

/// CW laser: constant envelope `√power · e^{iφ0}` on `grid`.
pub fn laser_field(grid: TimeGrid, power: f64, phi0: f64, wavelength_nm: f64) -> Result<OpticalField, OpticsError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(OpticsError::InvalidParameter(format!("laser power must be positive, got {power}")));
    }
    let (lo, hi) = WAVELENGTH_RANGE_NM;
    if !(lo..=hi).contains(&wavelength_nm) {
        return Err(OpticsError::InvalidParameter(format!(
            "wavelength {wavelength_nm} nm outside the {lo}-{hi} nm channel plan"
        )));
    }
    let amplitude = unit_phasor(phi0) * power.sqrt();
    Ok(OpticalField { envelope: Signal::constant(grid, amplitude)?, wavelength_nm, carrier_phase_offset: 0.0 })
}

/// Phase EOM: multiplies the envelope by `e^{iφ(t)}`.
pub fn phase_modulate(field: &OpticalField, phi: &RealSignal) -> Result<OpticalField, OpticsError> {
    let envelope = field.envelope.zip_map(phi, |e, p| e * unit_phasor(p))?;
    Ok(field.with_envelope(envelope))
}

/// Sinusoidal drive of the intensity EOM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfSignalSpec {
    /// Tone frequency in Hz (`ω0 / 2π`).
    pub frequency: f64,
    /// Initial phase `φ0'`, rad.
    pub phase: f64,
    /// Modulation depth `m` in [0, 1].
    pub depth: f64,
}

impl RfSignalSpec {
    pub fn omega(&self) -> f64 {
        std::f64::consts::TAU * self.frequency
    }

    /// Tone period `T_fre`.
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }
}

fn check_depth(depth: f64) -> Result<(), OpticsError> {
    if (0.0..=1.0).contains(&depth) {
        Ok(())
    } else {
        Err(OpticsError::InvalidParameter(format!("modulation depth must lie in [0, 1], got {depth}")))
    }
}

/// Intensity EOM: scales the envelope by `√(1 + m·sin(ω0 t + φ0'))`.
pub fn intensity_modulate(field: &OpticalField, rf: &RfSignalSpec) -> Result<OpticalField, OpticsError> {
    check_depth(rf.depth)?;
    let grid = *field.grid();
    if !(rf.frequency > 0.0) || grid.sample_rate() <= 4.0 * rf.frequency {
        return Err(OpticsError::GridTooCoarse { sample_rate: grid.sample_rate(), needed: 4.0 * rf.frequency });
    }
    if rf.depth == 0.0 {
        return Ok(field.clone());
    }
    let samples = field
        .envelope
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let arg = grid.tone_phase(rf.frequency, i) + rf.phase;
            e * (1.0 + rf.depth * arg.sin()).max(0.0).sqrt()
        })
        .collect::<Vec<Complex64>>();
    let envelope = Signal::with_mask(grid, samples, field.envelope.valid_mask().to_vec())?;
    Ok(field.with_envelope(envelope))
}

/// Intensity EOM driven by an arbitrary electrical signal, normalized so that
/// its largest valid excursion maps to depth `m`.
///
/// Used at the remote site to put the recovered RF back on the return carrier.
pub fn intensity_modulate_signal(
    field: &OpticalField,
    drive: &RealSignal,
    depth: f64,
) -> Result<OpticalField, OpticsError> {
    check_depth(depth)?;
    let peak = drive.peak_abs();
    if peak == 0.0 || depth == 0.0 {
        let envelope = field.envelope.zip_map(drive, |e, _| e)?;
        return Ok(field.with_envelope(envelope));
    }
    let k = depth / peak;
    let envelope = field.envelope.zip_map(drive, |e, v| e * (1.0 + k * v).max(0.0).sqrt())?;
    Ok(field.with_envelope(envelope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> TimeGrid {
        TimeGrid::new(16e9, 0.0, 256).unwrap()
    }

    #[test]
    fn cw_laser_has_flat_intensity_and_phase() {
        let f = laser_field(grid(), 1e-3, FRAC_PI_2, LAMBDA_FORWARD_NM).unwrap();
        for z in f.envelope.samples() {
            assert!((z.norm_sqr() - 1e-3).abs() < 1e-18);
            assert!((z.arg() - FRAC_PI_2).abs() < 1e-15);
        }
        assert!(laser_field(grid(), 0.0, 0.0, 1550.0).is_err());
        assert!(laser_field(grid(), 1.0, 0.0, 800.0).is_err());
    }

    #[test]
    fn pi_phase_negates_envelope_exactly() {
        let f = laser_field(grid(), 1e-3, 0.3, LAMBDA_FORWARD_NM).unwrap();
        let phi = RealSignal::constant(grid(), PI).unwrap();
        let g = phase_modulate(&f, &phi).unwrap();
        for (a, b) in f.envelope.samples().iter().zip(g.envelope.samples()) {
            assert_eq!(*b, -*a);
        }
    }

    #[test]
    fn full_depth_im_reaches_zero() {
        let f = laser_field(grid(), 1.0, 0.0, LAMBDA_FORWARD_NM).unwrap();
        let rf = RfSignalSpec { frequency: 1e9, phase: 0.0, depth: 1.0 };
        let g = intensity_modulate(&f, &rf).unwrap();
        let i = g.intensity();
        // sin = -1 at t = 0.75 ns, sample 12
        assert!(i.samples()[12].abs() < 1e-15);
        assert!((i.samples()[4] - 2.0).abs() < 1e-15);
        let bad = RfSignalSpec { depth: 1.5, ..rf };
        assert!(intensity_modulate(&f, &bad).is_err());
    }

    #[test]
    fn carrier_offset_stays_reduced() {
        let mut f = laser_field(grid(), 1.0, 0.0, LAMBDA_FORWARD_NM).unwrap();
        f.advance_carrier(538.7e-6);
        assert!((0.0..std::f64::consts::TAU).contains(&f.carrier_phase_offset));
        let before = f.carrier_phase_offset;
        // one optical period leaves the offset unchanged
        f.advance_carrier(1.0 / f.carrier_frequency());
        let d = (f.carrier_phase_offset - before).abs();
        assert!(d < 1e-9 || (d - std::f64::consts::TAU).abs() < 1e-9);
    }
}
