//! Front-end logic for the `spinr` binary: report records, the Table 1
//! reproduction and the verification ledger.

pub mod report;
pub mod table1;
pub mod verify;

use spinr::numlin::Tolerance;

/// Exit codes of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Default tolerance, with `SPINR_TOL` overriding the residual tolerance.
pub fn tolerance_from_env() -> Result<Tolerance, String> {
    match std::env::var("SPINR_TOL") {
        Ok(v) => parse_tolerance(&v),
        Err(_) => Ok(Tolerance::default()),
    }
}

pub fn parse_tolerance(v: &str) -> Result<Tolerance, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("bad tolerance '{v}'"))?;
    Tolerance::with_residual(x).map_err(|e| e.to_string())
}

/// Maps library errors onto the exit-code contract.
pub fn exit_code(err: &spinr::Error) -> i32 {
    match err {
        spinr::Error::Verification(_) => EXIT_MISMATCH,
        _ => EXIT_INVALID,
    }
}
