use crate::error::{Error, Result};

pub const GAMMA_AIR: f64 = 1.4;
pub const R_AIR: f64 = 287.05;

const TOLERANCE: f64 = 1e-9;
const MAX_ITER: usize = 100;

/// Mach number and static temperature from true airspeed (m/s) and total air temperature (K).
///
/// Iterates M = V / sqrt(γ R Ts), Ts = tat / (1 + 0.2 M²) until successive Mach values agree to 1e-9.
pub fn derive_mach(v: f64, tat: f64) -> Result<(f64, f64)> {
    if !(v >= 0.0) || !(tat > 0.0) || !v.is_finite() || !tat.is_finite() {
        return Err(Error::Numeric(format!(
            "mach derivation needs V >= 0 and tat > 0, got V={v}, tat={tat}"
        )));
    }
    let mut m = 0.0_f64;
    for _ in 0..MAX_ITER {
        let ts = tat / (1.0 + 0.2 * m * m);
        let next = v / (GAMMA_AIR * R_AIR * ts).sqrt();
        if (next - m).abs() < TOLERANCE {
            let ts = tat / (1.0 + 0.2 * next * next);
            return Ok((next, ts));
        }
        m = next;
    }
    Err(Error::Numeric(format!(
        "mach iteration did not converge for V={v}, tat={tat}"
    )))
}
