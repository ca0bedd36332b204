use serde_json::json;

use crate::cli::{SweepArgs, VerifyArgs, VerifyScenario};
use crate::commands::with_manifest;
use crate::manifest::Manifest;
use crate::sweep::{parse_box, run_sweep, Scenario, SweepPlan};
use crate::{load_potential, CliError, Outcome};

pub fn run(args: &VerifyArgs, timing: bool) -> Result<Outcome, CliError> {
    let (scenario, sweep): (Scenario, &SweepArgs) = match &args.scenario {
        VerifyScenario::Premeta { x0, sweep } => (Scenario::Premeta { x0: x0.clone() }, sweep),
        VerifyScenario::Critical { point, delta_exp, sweep } => {
            if !(*delta_exp > 1.0 / 3.0 && *delta_exp < 0.5) {
                return Err(CliError::argument("--delta-exp must lie in (1/3, 1/2)"));
            }
            (Scenario::Critical { point: point.clone(), delta_exp: *delta_exp }, sweep)
        }
        VerifyScenario::Capacity { saddle, sweep } => (Scenario::Capacity { saddle: saddle.clone() }, sweep),
        VerifyScenario::Metastable { level, class, omega, sweep } => {
            (Scenario::Metastable { level: *level, class: *class, omega: omega.clone() }, sweep)
        }
    };
    let (mut u, spec, input) = load_potential(&sweep.potential)?;
    if let Some(text) = &sweep.bounds {
        u = u.with_bounds(parse_box(text)?)?;
    }
    let plan = SweepPlan::new(scenario, u, sweep.eps_list.clone(), sweep.grid_n, sweep.tol, timing)?;
    let report = run_sweep(&plan)?;
    let mut settings = plan.settings();
    settings["potential"] = spec;
    let manifest = Manifest::new("verify", input.into_iter().collect(), settings, timing);
    let body = json!({
        "rows": report.rows,
        "details": report.details,
        "trend_ok": report.trend_ok,
        "final_rel_err": report.final_rel_err,
        "tolerance": report.tolerance,
        "extra_ok": report.extra_ok,
        "passed": report.passed,
    });
    let mut outcome = Outcome::new(with_manifest(manifest, body)?, report.passed);
    outcome.csv = Some(report.to_csv()?);
    Ok(outcome)
}
