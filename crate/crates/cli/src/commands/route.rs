use std::process::ExitCode;

use whydiffer::learning::load_model;
use whydiffer::routing::{active_labels, route_resolutions, ResolutionStep};
use whydiffer::{aggregate_ground_truth, AblationMask, LabelSet, ReasonLabel};

use crate::data::{load_inputs, masked_rows};
use crate::failure::Failure;
use crate::output::{csv_writer, ensure_dir};
use crate::{DataArgs, Globals, RouteArgs};

fn join_steps(steps: &[ResolutionStep]) -> String {
    steps.iter().map(|s| s.id()).collect::<Vec<_>>().join(" ")
}

fn join_labels(labels: LabelSet) -> String {
    labels.iter().map(ReasonLabel::code).collect::<Vec<_>>().join(" ")
}

pub fn run(globals: &Globals, args: &RouteArgs) -> Result<ExitCode, Failure> {
    if let Some(list) = &args.labels {
        let mut labels = LabelSet::empty();
        for code in list.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let label: ReasonLabel = code.parse().map_err(|e| Failure::setup(format!("{e}")))?;
            labels.insert(label);
        }
        for step in route_resolutions(labels) {
            println!("{}\t{}", step.id(), step.description());
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(records) = &args.records else {
        return Err(Failure::setup("route needs --labels or --records"));
    };
    let data = DataArgs {
        records: records.clone(),
        image_features: args.image_features.clone(),
    };
    let inputs = load_inputs(&data, globals.lenient)?;
    let active: Vec<LabelSet> = match &args.model {
        Some(path) => {
            let model = load_model(path)?;
            let mask = model.mask.unwrap_or(AblationMask::QIA);
            let all: Vec<usize> = (0..inputs.records.len()).collect();
            masked_rows(&inputs.features, &all, mask)
                .iter()
                .map(|x| model.predict(x).map(|s| active_labels(&s)))
                .collect::<Result<_, _>>()?
        }
        None => {
            let k = globals.threshold_or_default();
            inputs
                .records
                .iter()
                .map(|r| aggregate_ground_truth(&r.annotations, k).labels)
                .collect()
        }
    };

    ensure_dir(&globals.out)?;
    let (mut w, path) = csv_writer(&globals.out, "routes.csv")?;
    w.write_record(["id", "reasons", "steps"])?;
    for (record, labels) in inputs.records.iter().zip(&active) {
        w.write_record([
            record.id.clone(),
            join_labels(*labels),
            join_steps(&route_resolutions(*labels)),
        ])?;
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;
    println!("wrote {} routes to {}", active.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
