#![allow(dead_code)]

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, Normal};

/// A 622-row CSV shaped like the liver-metastases data: survival in months,
/// an event flag and the nine covariates of the built-in schema. Times are
/// recorded in whole months, so ties occur as in clinical data. Survival is
/// Weibull with a scale that depends on DLM, NLM and TNM, so a tree sampler
/// has real structure to find.
pub fn liver_like_csv(path: &Path, rows: usize, seed: u64) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    writeln!(f, "time,event,DLM,AGE,NLM,TD,SEX,LI,LRD,TNM,LOC").unwrap();
    let normal = Normal::new(0.0f64, 1.0).unwrap();
    let censor = Exp::new(1.0 / 60.0).unwrap();
    for _ in 0..rows {
        let dlm: f64 = (3.0 + 2.0 * normal.sample(&mut rng)).abs().max(0.2);
        let age: u32 = rng.random_range(30..85);
        let nlm: u32 = rng.random_range(1..6);
        let tnm = ["I", "II", "III", "IV"][rng.random_range(0..4)];
        let td = ["synchronous", "metachronous"][rng.random_range(0..2)];
        let sex = ["M", "F"][rng.random_range(0..2)];
        let li = ["unilobar", "bilobar"][rng.random_range(0..2)];
        let lrd = ["no", "yes"][rng.random_range(0..2)];
        let loc = ["colon", "rectum"][rng.random_range(0..2)];
        let mut scale = 40.0;
        if dlm > 5.0 {
            scale *= 0.5;
        }
        if nlm >= 3 {
            scale *= 0.6;
        }
        if tnm == "IV" {
            scale *= 0.7;
        }
        let shape = 1.3;
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let t_event = scale * (-u.ln()).powf(1.0 / shape);
        let t_cens = censor.sample(&mut rng) + 6.0;
        let (time, event) = if t_event <= t_cens { (t_event, 1) } else { (t_cens, 0) };
        writeln!(
            f,
            "{},{event},{dlm:.2},{age},{nlm},{td},{sex},{li},{lrd},{tnm},{loc}",
            time.round().max(1.0)
        )
        .unwrap();
    }
}
