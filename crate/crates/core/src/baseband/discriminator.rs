//! Code and carrier discriminators.

use super::{BasebandError, CorrelatorOutput};

/// Noncoherent early-minus-late-amplitude code discriminator.
///
/// Output in chips of misalignment, positive when the incoming code leads the
/// prompt replica. The (1 - d/2) normalization is the linear-region gain of
/// the ideal correlation triangle at the configured early-late spacing.
pub fn code_discriminator(c: &CorrelatorOutput) -> Result<f64, BasebandError> {
    let e = (c.i_e * c.i_e + c.q_e * c.q_e).sqrt();
    let l = (c.i_l * c.i_l + c.q_l * c.q_l).sqrt();
    let sum = e + l;
    if sum <= 0.0 {
        return Err(BasebandError::NoCodePower);
    }
    let gain = 1.0 - c.half_spacing_chips;
    Ok(gain * (e - l) / sum)
}

/// Costas carrier discriminator, in cycles: atan(qP/iP)/(2*pi).
pub fn carrier_discriminator(c: &CorrelatorOutput) -> Result<f64, BasebandError> {
    if c.i_p == 0.0 && c.q_p == 0.0 {
        return Err(BasebandError::NoPromptPower);
    }
    Ok((c.q_p / c.i_p).atan() / (2.0 * std::f64::consts::PI))
}
