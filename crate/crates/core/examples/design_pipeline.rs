//! Coarse sweep, fine minimization and mismatch correction from the default start.
use forge::workflow::{run_design, DesignConfig};

fn main() -> forge::Result<()> {
    let report = run_design(&DesignConfig::default())?;
    print!("{}", report.to_text());
    println!();
    print!("{}", report.stage_log_csv());
    Ok(())
}
