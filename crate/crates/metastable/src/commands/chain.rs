use metastable_core::chain::{
    communicating_classes, dv_rate, stationary_distributions, trace_process, DvMethod, StateMeasure,
};
use serde_json::json;

use crate::cli::{ChainArgs, DvChoice};
use crate::commands::with_manifest;
use crate::io::{read_json, ChainFile, WeightsFile};
use crate::manifest::{InputRecord, Manifest};
use crate::{CliError, Outcome};

pub fn run(args: &ChainArgs, timing: bool) -> Result<Outcome, CliError> {
    let (file, bytes): (ChainFile, _) = read_json(&args.chain)?;
    let mut inputs = vec![InputRecord::new(&args.chain, &bytes)];
    let chain = file.build()?;
    let names = |states: &[usize]| states.iter().map(|&i| file.states[i].clone()).collect::<Vec<_>>();
    let mut body = json!({ "states": file.states });
    if args.classes {
        let dec = communicating_classes(&chain);
        let stationary = stationary_distributions(&chain)?;
        let mut recurrent = stationary.iter();
        let classes: Vec<_> = dec
            .classes
            .iter()
            .map(|c| {
                let law = if c.recurrent { recurrent.next().map(|m| m.weights().to_vec()) } else { None };
                json!({ "states": names(&c.states), "recurrent": c.recurrent, "stationary": law })
            })
            .collect();
        body["classes"] = json!(classes);
    }
    if let Some(path) = &args.dv {
        let (weights, bytes): (WeightsFile, _) = read_json(path)?;
        inputs.push(InputRecord::new(path, &bytes));
        let omega = StateMeasure::probability(weights.weights().to_vec())?;
        let decomposed = matches!(args.method, DvChoice::Decomposed | DvChoice::Both)
            .then(|| dv_rate(&chain, &omega, DvMethod::Decomposed))
            .transpose()?;
        let sup = matches!(args.method, DvChoice::Sup | DvChoice::Both)
            .then(|| dv_rate(&chain, &omega, DvMethod::Sup))
            .transpose()?;
        let gap = decomposed.zip(sup).map(|(a, b)| (a - b).abs());
        body["dv"] = json!({ "weights": omega.weights(), "decomposed": decomposed, "sup": sup, "difference": gap });
    }
    if let Some(keys) = &args.trace {
        let set = keys.iter().map(|k| file.state(k)).collect::<Result<Vec<_>, _>>()?;
        let traced = trace_process(&chain, &set)?;
        body["trace"] = json!({ "states": names(&set), "rates": traced.rows() });
    }
    let settings = json!({
        "chain": args.chain.display().to_string(),
        "dv": args.dv.as_ref().map(|p| p.display().to_string()),
        "method": format!("{:?}", args.method).to_lowercase(),
        "trace": args.trace,
        "classes": args.classes,
    });
    let manifest = Manifest::new("chain", inputs, settings, timing);
    Ok(Outcome::new(with_manifest(manifest, body)?, true))
}
