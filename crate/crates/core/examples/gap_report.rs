// Relative generalization gap with bootstrap intervals from raw outcomes.

use std::collections::BTreeMap;

use icl_gap::metrics::{gap_report_seeded, EvalSetting, GapReportJson};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> icl_gap::Result<()> {
    let rates = [
        (EvalSetting::TEST_TEST, 0.62),
        (EvalSetting::TRAIN_TRAIN, 0.70),
        (EvalSetting::TEST_TRAIN, 0.41),
        (EvalSetting::TRAIN_TEST, 0.35),
    ];
    let mut data = ChaCha8Rng::seed_from_u64(1);
    let outcomes: BTreeMap<EvalSetting, BTreeMap<u64, Vec<bool>>> = rates
        .iter()
        .map(|&(setting, p)| {
            let seeds = (0..3u64)
                .map(|seed| (seed, (0..400).map(|_| data.random_bool(p)).collect()))
                .collect();
            (setting, seeds)
        })
        .collect();

    let report = gap_report_seeded(&outcomes, 5000, 0.95, &mut ChaCha8Rng::seed_from_u64(2))?;
    for s in EvalSetting::ALL {
        let (lo, hi) = report.ci[&s];
        println!("{:<12} acc {:.3}  95% CI [{lo:.3}, {hi:.3}]", s.to_string(), report.acc[&s]);
    }
    println!("relative gap {:?}", report.relative_gap);
    println!("{}", serde_json::to_string_pretty(&GapReportJson::from(&report))?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
