use std::process::ExitCode;

use whydiffer::features::apply_mask;
use whydiffer::AblationMask;

use crate::data::load_inputs;
use crate::failure::Failure;
use crate::output::{csv_writer, ensure_dir, num};
use crate::{DataArgs, Globals};

pub fn run(globals: &Globals, data: &DataArgs, mask: AblationMask) -> Result<ExitCode, Failure> {
    let inputs = load_inputs(data, globals.lenient)?;
    ensure_dir(&globals.out)?;
    let (mut w, path) = csv_writer(&globals.out, "features.csv")?;
    w.write_record(std::iter::once("id".to_string()).chain(mask.feature_names()))?;
    for (record, features) in inputs.records.iter().zip(&inputs.features) {
        w.write_record(
            std::iter::once(record.id.clone()).chain(apply_mask(features, mask).into_iter().map(num)),
        )?;
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;
    println!("wrote {} feature rows to {}", inputs.records.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
