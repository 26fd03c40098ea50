//! Dataset ingestion: the canonical on-disk schema, stance-phase extraction
//! and a deterministic synthetic gait generator.
//!
//! On-disk layout:
//!
//! ```text
//! <dir>/meta.csv                                  subject,session,body_mass_kg
//! <dir>/trials/<subject>_<session>_<trial>_<L|R>.csv   t_ms,fx,fy,fz
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result, ResultExt};
use crate::model::{
    validate_trial, Foot, FootForces, ForceTrial, GRAVITY, N_SESSIONS, STANCE_THRESHOLD_N,
    TRIALS_PER_SESSION, TRIALS_PER_SUBJECT,
};

const META_HEADER: &str = "subject,session,body_mass_kg";
const TRIAL_HEADER: &str = "t_ms,fx,fy,fz";

/// All trials of one participant, sorted by (session, trial).
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectDataset {
    pub subject_id: String,
    pub sample_rate: f64,
    /// Body mass per session (1..=6), kilograms.
    pub session_mass_kg: BTreeMap<u8, f64>,
    pub trials: Vec<ForceTrial>,
}

impl SubjectDataset {
    /// Class labels 0..6 (session − 1), one per trial.
    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(ForceTrial::label).collect()
    }

    /// Checks the 6 sessions × 15 trials layout and the shared sample rate.
    pub fn check_complete(&self) -> Result<()> {
        let mut per_session = [0usize; N_SESSIONS];
        for t in &self.trials {
            per_session[t.label()] += 1;
            if t.sample_rate != self.sample_rate {
                return Err(Error::Dataset(format!(
                    "subject {}: trial {} has sample rate {} Hz, expected {} Hz",
                    self.subject_id,
                    t.identity(),
                    t.sample_rate,
                    self.sample_rate
                )));
            }
        }
        if self.trials.len() != TRIALS_PER_SUBJECT
            || per_session.iter().any(|&c| c != TRIALS_PER_SESSION)
        {
            return Err(Error::Dataset(format!(
                "subject {} has {} trials with per-session counts {:?}; expected 6 sessions x 15 trials",
                self.subject_id,
                self.trials.len(),
                per_session
            )));
        }
        Ok(())
    }
}

/// Longest contiguous run of samples at or above `threshold`; the earliest
/// run wins among equally long ones.
pub fn extract_stance(vertical: &[f64], threshold: f64) -> Result<Range<usize>> {
    if vertical.is_empty() {
        return Err(Error::InvalidArgument("empty vertical force series".into()));
    }
    let mut best: Option<Range<usize>> = None;
    let mut start = None;
    for i in 0..=vertical.len() {
        let above = i < vertical.len() && vertical[i] >= threshold;
        match (above, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.as_ref().map_or(true, |b| i - s > b.len()) {
                    best = Some(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    best.ok_or(Error::EmptyStance { threshold })
}

/// Crops both feet of a trial to their stance phases.
pub fn crop_to_stance(mut trial: ForceTrial, threshold: f64) -> Result<ForceTrial> {
    for foot in Foot::BOTH {
        let forces = trial.foot(foot);
        let range = extract_stance(&forces.vertical, threshold)
            .map_err(|e| e.context(format!("{} {} foot", trial.identity(), foot.code())))?;
        if range.len() != forces.len() {
            let cropped = forces.slice(range);
            match foot {
                Foot::Left => trial.left = cropped,
                Foot::Right => trial.right = cropped,
            }
        }
    }
    Ok(trial)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Admit subjects with missing trials (a warning is printed instead of
    /// failing).
    pub lenient: bool,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{what}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn check_header(path: &Path, text: &str, expected: &str) -> Result<()> {
    let header = text.lines().next().unwrap_or("").trim();
    if header != expected {
        return Err(parse_err(
            path,
            1,
            format!("header {header:?}, expected {expected:?}"),
        ));
    }
    Ok(())
}

type MetaTable = BTreeMap<(String, u8), f64>;

fn read_meta(path: &Path) -> Result<MetaTable> {
    let text = read_text(path)?;
    check_header(path, &text, META_HEADER)?;
    let mut meta = MetaTable::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, line_no, format!("expected 3 fields, got {}", fields.len())));
        }
        let subject = fields[0].trim().to_string();
        let session: u8 = fields[1]
            .trim()
            .parse()
            .ok()
            .filter(|s| (1..=N_SESSIONS as u8).contains(s))
            .ok_or_else(|| parse_err(path, line_no, format!("session {:?} not in 1..=6", fields[1])))?;
        let mass = parse_f64(path, line_no, fields[2], "body_mass_kg")?;
        if mass <= 0.0 {
            return Err(parse_err(path, line_no, format!("body mass {mass} kg is not positive")));
        }
        if meta.insert((subject.clone(), session), mass).is_some() {
            return Err(parse_err(
                path,
                line_no,
                format!("duplicate row for subject {subject} session {session}"),
            ));
        }
    }
    Ok(meta)
}

/// (forces, sample rate)
fn read_trial_file(path: &Path) -> Result<(FootForces, f64)> {
    let text = read_text(path)?;
    check_header(path, &text, TRIAL_HEADER)?;
    let mut t = Vec::new();
    let mut ch: [Vec<f64>; 3] = Default::default();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, line_no, format!("expected 4 fields, got {}", fields.len())));
        }
        t.push(parse_f64(path, line_no, fields[0], "t_ms")?);
        for (c, (dst, name)) in ch.iter_mut().zip(["fx", "fy", "fz"]).enumerate() {
            dst.push(parse_f64(path, line_no, fields[c + 1], name)?);
        }
    }
    if t.len() < 2 {
        return Err(parse_err(path, 1, format!("{} samples, need at least 2", t.len())));
    }
    let dt = t[1] - t[0];
    if dt <= 0.0 {
        return Err(parse_err(path, 3, "t_ms is not increasing"));
    }
    // Uniform sampling; tolerate text round-off in the time column.
    let span = t[t.len() - 1] - t[0];
    let expected = dt * (t.len() - 1) as f64;
    if (span - expected).abs() > 1e-6 * expected.max(1.0) {
        return Err(parse_err(path, 2, "t_ms is not uniformly spaced"));
    }
    let sample_rate = 1000.0 * (t.len() - 1) as f64 / span;
    Ok((FootForces::from_channels(ch), sample_rate))
}

struct TrialKey {
    subject: String,
    session: u8,
    trial: u8,
    foot: Foot,
}

fn parse_trial_name(path: &Path) -> Option<TrialKey> {
    let stem = path.file_name()?.to_str()?.strip_suffix(".csv")?;
    let mut parts = stem.rsplitn(4, '_');
    let foot = match parts.next()? {
        "L" => Foot::Left,
        "R" => Foot::Right,
        _ => return None,
    };
    let trial: u8 = parts.next()?.parse().ok()?;
    let session: u8 = parts.next()?.parse().ok()?;
    let subject = parts.next()?.to_string();
    if subject.is_empty() {
        return None;
    }
    Some(TrialKey {
        subject,
        session,
        trial,
        foot,
    })
}

/// Rounds a rate recovered from millisecond timestamps back to the value it
/// was written from when the text round trip perturbed it.
fn snap_rate(rate: f64) -> f64 {
    let r = rate.round();
    if (rate - r).abs() <= 1e-6 * r.max(1.0) {
        r
    } else {
        rate
    }
}

/// Loads every subject found in `data_dir`.
pub fn load_dataset(data_dir: &Path, opts: &LoadOptions) -> Result<Vec<SubjectDataset>> {
    let meta = read_meta(&data_dir.join("meta.csv"))?;
    let trials_dir = data_dir.join("trials");
    let entries = fs::read_dir(&trials_dir).map_err(|e| Error::io(&trials_dir, e))?;

    type FilePair = [Option<PathBuf>; 2];
    let mut files: BTreeMap<(String, u8, u8), FilePair> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&trials_dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let key = parse_trial_name(&path).ok_or_else(|| {
            Error::Dataset(format!(
                "trial file {} does not follow <subject>_<session>_<trial>_<L|R>.csv",
                path.display()
            ))
        })?;
        if !(1..=N_SESSIONS as u8).contains(&key.session)
            || !(1..=TRIALS_PER_SESSION as u8).contains(&key.trial)
        {
            return Err(Error::Dataset(format!(
                "trial file {} has session/trial outside 6 x 15",
                path.display()
            )));
        }
        let slot = files
            .entry((key.subject, key.session, key.trial))
            .or_default();
        slot[key.foot as usize] = Some(path);
    }

    for (subject, session, _) in files.keys() {
        if !meta.contains_key(&(subject.clone(), *session)) {
            return Err(Error::Dataset(format!(
                "meta.csv has no body mass for subject {subject} session {session}"
            )));
        }
    }

    let subjects: BTreeSet<String> = meta
        .keys()
        .map(|(s, _)| s.clone())
        .chain(files.keys().map(|(s, _, _)| s.clone()))
        .collect();

    let mut out = Vec::with_capacity(subjects.len());
    for subject in subjects {
        let mut trials = Vec::new();
        let mut sample_rate: Option<f64> = None;
        for ((_, session, trial), pair) in files.range((subject.clone(), 0, 0)..=(subject.clone(), u8::MAX, u8::MAX)) {
            let [Some(left_path), Some(right_path)] = pair else {
                let msg = format!(
                    "subject {subject} session {session} trial {trial} is missing one foot's file"
                );
                if opts.lenient {
                    eprintln!("warning: {msg}; trial skipped");
                    continue;
                }
                return Err(Error::Dataset(msg));
            };
            let (left, rate_l) = read_trial_file(left_path)?;
            let (right, rate_r) = read_trial_file(right_path)?;
            let (rate_l, rate_r) = (snap_rate(rate_l), snap_rate(rate_r));
            for rate in [rate_l, rate_r] {
                match sample_rate {
                    None => sample_rate = Some(rate),
                    Some(r) if (r - rate).abs() > 1e-9 * r => {
                        return Err(Error::Dataset(format!(
                            "subject {subject}: sample rate {rate} Hz in session {session} trial {trial} differs from {r} Hz"
                        )))
                    }
                    _ => {}
                }
            }
            let mass = meta[&(subject.clone(), *session)];
            let raw = ForceTrial {
                subject_id: subject.clone(),
                session: *session,
                trial: *trial,
                sample_rate: rate_l,
                left,
                right,
                body_weight: mass * GRAVITY,
            };
            let cropped = crop_to_stance(raw, STANCE_THRESHOLD_N)?;
            trials.push(validate_trial(cropped)?);
        }
        let session_mass_kg: BTreeMap<u8, f64> = meta
            .iter()
            .filter(|((s, _), _)| *s == subject)
            .map(|((_, session), m)| (*session, *m))
            .collect();
        let ds = SubjectDataset {
            subject_id: subject.clone(),
            sample_rate: sample_rate.unwrap_or(0.0),
            session_mass_kg,
            trials,
        };
        if let Err(e) = ds.check_complete() {
            if !opts.lenient {
                return Err(e);
            }
            eprintln!("warning: {e}; admitted in lenient mode");
            if ds.trials.is_empty() {
                continue;
            }
        }
        out.push(ds);
    }
    Ok(out)
}

/// Writes datasets in the canonical schema.
pub fn write_dataset(data_dir: &Path, datasets: &[SubjectDataset]) -> Result<()> {
    let trials_dir = data_dir.join("trials");
    fs::create_dir_all(&trials_dir).map_err(|e| Error::io(&trials_dir, e))?;

    let meta_path = data_dir.join("meta.csv");
    let mut meta = String::from(META_HEADER);
    meta.push('\n');
    for ds in datasets {
        for (session, mass) in &ds.session_mass_kg {
            meta.push_str(&format!("{},{},{}\n", ds.subject_id, session, mass));
        }
    }
    fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;

    for ds in datasets {
        for t in &ds.trials {
            for foot in Foot::BOTH {
                let path = trials_dir.join(format!(
                    "{}_{}_{}_{}.csv",
                    t.subject_id,
                    t.session,
                    t.trial,
                    foot.code()
                ));
                write_trial_file(&path, t.foot(foot), t.sample_rate)?;
            }
        }
    }
    Ok(())
}

fn write_trial_file(path: &Path, forces: &FootForces, sample_rate: f64) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{TRIAL_HEADER}").map_err(io)?;
    let dt_ms = 1000.0 / sample_rate;
    for i in 0..forces.len() {
        writeln!(
            w,
            "{},{},{},{}",
            i as f64 * dt_ms,
            forces.fore_aft[i],
            forces.medio_lateral[i],
            forces.vertical[i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Knobs of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sample_rate: f64,
    /// Stationary σ of the measurement noise as a fraction of body weight.
    pub noise_frac: f64,
    /// Lag-one correlation of the AR(1) measurement noise (0 = white).
    pub noise_corr: f64,
    /// Relative σ of the per-trial waveform parameter jitter.
    pub trial_jitter: f64,
    /// Relative σ of the per-session waveform perturbation.
    pub session_effect: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate: 1000.0,
            noise_frac: 0.002,
            noise_corr: 0.99,
            trial_jitter: 0.005,
            session_effect: 0.05,
        }
    }
}

/// Waveform shape of one foot. Forces are in units of body weight over the
/// stance phase s ∈ [0, 1].
#[derive(Debug, Clone, Copy)]
struct WaveParams {
    /// Weight of sin(πs) in the vertical force.
    vert_fundamental: f64,
    /// Weight of sin(3πs); carves the midstance valley.
    vert_third: f64,
    /// Phase warp s + skew·s(1−s): shifts loading toward heel or toe.
    skew: f64,
    fore_aft_amp: f64,
    fore_aft_second: f64,
    ml_amp: f64,
    ml_third: f64,
    duration_ms: f64,
}

impl WaveParams {
    fn base(rng: &mut ChaCha8Rng, duration_ms: f64) -> Self {
        let mut jitter = |sd: f64| 1.0 + sd * rng.sample::<f64, _>(rand_distr::StandardNormal);
        // Peaks ≈ 1.1 at ~25%/75% of stance, valley ≈ 0.75 at midstance.
        Self {
            vert_fundamental: 1.153 * jitter(0.02),
            vert_third: 0.403 * jitter(0.04),
            skew: 0.0,
            fore_aft_amp: 0.2 * jitter(0.05),
            fore_aft_second: 0.03 * jitter(0.1),
            ml_amp: 0.05 * jitter(0.05),
            ml_third: 0.3 * jitter(0.1),
            duration_ms: duration_ms * jitter(0.01),
        }
    }

    fn perturbed(&self, rng: &mut ChaCha8Rng, rel_sd: f64) -> Self {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let skew = self.skew + rel_sd * normal.sample(rng);
        let mut f = |sd: f64| 1.0 + sd * normal.sample(rng);
        Self {
            vert_fundamental: self.vert_fundamental * f(rel_sd),
            vert_third: self.vert_third * f(rel_sd),
            skew,
            fore_aft_amp: self.fore_aft_amp * f(rel_sd),
            fore_aft_second: self.fore_aft_second * f(rel_sd),
            ml_amp: self.ml_amp * f(rel_sd),
            ml_third: self.ml_third * f(rel_sd),
            duration_ms: (self.duration_ms * f(rel_sd)).clamp(600.0, 800.0),
        }
    }

    /// (fore-aft, medio-lateral, vertical) in body weights at phase `s`.
    fn sample(&self, s: f64, ml_sign: f64) -> [f64; 3] {
        if !(0.0..=1.0).contains(&s) {
            return [0.0; 3];
        }
        let w = s + self.skew * s * (1.0 - s);
        let vertical =
            self.vert_fundamental * (PI * w).sin() + self.vert_third * (3.0 * PI * w).sin();
        let fore_aft = -self.fore_aft_amp * (2.0 * PI * w).sin()
            + self.fore_aft_second * (4.0 * PI * w).sin();
        let ml = ml_sign
            * self.ml_amp
            * ((1.0 - self.ml_third) * (PI * w).sin() + self.ml_third * (3.0 * PI * w).sin());
        [fore_aft, ml, vertical]
    }
}

/// Samples below threshold padded around each generated stance.
const SYNTH_PAD: usize = 15;

fn render_foot(
    params: &WaveParams,
    body_weight: f64,
    sample_rate: f64,
    ml_sign: f64,
    noise_sd: f64,
    noise_corr: f64,
    rng: &mut ChaCha8Rng,
) -> FootForces {
    let innovation = noise_sd * (1.0 - noise_corr * noise_corr).sqrt();
    let n = ((params.duration_ms * sample_rate / 1000.0).round() as usize).max(8);
    let total = n + 2 * SYNTH_PAD;
    let mut ch: [Vec<f64>; 3] = [
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
    ];
    let mut noise = [0.0; 3];
    if noise_sd > 0.0 {
        for e in &mut noise {
            *e = noise_sd * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    for i in 0..total {
        let s = (i as f64 - SYNTH_PAD as f64) / (n - 1) as f64;
        let clean = params.sample(s, ml_sign);
        for c in 0..3 {
            if noise_sd > 0.0 && i > 0 {
                noise[c] = noise_corr * noise[c]
                    + innovation * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            ch[c].push(body_weight * clean[c] + noise[c]);
        }
    }
    FootForces::from_channels(ch)
}

/// Generates `n_subjects` subjects with the default [`SynthConfig`].
pub fn synthesize_dataset(n_subjects: usize, seed: u64) -> Result<Vec<SubjectDataset>> {
    synthesize_dataset_with(n_subjects, seed, &SynthConfig::default())
}

pub fn synthesize_dataset_with(
    n_subjects: usize,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<Vec<SubjectDataset>> {
    if n_subjects == 0 {
        return Err(Error::InvalidArgument("n_subjects must be at least 1".into()));
    }
    let valid = cfg.sample_rate > 0.0
        && cfg.noise_frac >= 0.0
        && (0.0..1.0).contains(&cfg.noise_corr)
        && cfg.trial_jitter >= 0.0
        && cfg.session_effect >= 0.0;
    if !valid {
        return Err(Error::InvalidArgument(format!("invalid synth config {cfg:?}")));
    }
    (0..n_subjects)
        .map(|i| synthesize_subject(i, seed, cfg))
        .collect()
}

fn synthesize_subject(index: usize, seed: u64, cfg: &SynthConfig) -> Result<SubjectDataset> {
    let subject_id = format!("S{:02}", index + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);

    let mass: f64 = rng.gen_range(55.0..90.0);
    let duration: f64 = rng.gen_range(640.0..760.0);
    let base = [
        WaveParams::base(&mut rng, duration),
        WaveParams::base(&mut rng, duration),
    ];
    let jitter = cfg.trial_jitter;

    let mut session_mass_kg = BTreeMap::new();
    let mut trials = Vec::with_capacity(TRIALS_PER_SUBJECT);
    for session in 1..=N_SESSIONS as u8 {
        let session_mass = mass + 0.3 * rng.sample::<f64, _>(rand_distr::StandardNormal);
        session_mass_kg.insert(session, session_mass);
        let body_weight = session_mass * GRAVITY;
        let session_params = [
            base[0].perturbed(&mut rng, cfg.session_effect),
            base[1].perturbed(&mut rng, cfg.session_effect),
        ];
        for trial in 1..=TRIALS_PER_SESSION as u8 {
            let mut feet = Vec::with_capacity(2);
            for (f, ml_sign) in [(0usize, -1.0), (1, 1.0)] {
                let params = if jitter > 0.0 {
                    session_params[f].perturbed(&mut rng, jitter)
                } else {
                    session_params[f]
                };
                feet.push(render_foot(
                    &params,
                    body_weight,
                    cfg.sample_rate,
                    ml_sign,
                    cfg.noise_frac * body_weight,
                    cfg.noise_corr,
                    &mut rng,
                ));
            }
            let right = feet.pop().expect("two feet");
            let left = feet.pop().expect("two feet");
            let raw = ForceTrial {
                subject_id: subject_id.clone(),
                session,
                trial,
                sample_rate: cfg.sample_rate,
                left,
                right,
                body_weight,
            };
            let trial = crop_to_stance(raw, STANCE_THRESHOLD_N)
                .and_then(validate_trial)
                .context_with(|| format!("synthesizing {subject_id}"))?;
            trials.push(trial);
        }
    }
    Ok(SubjectDataset {
        subject_id,
        sample_rate: cfg.sample_rate,
        session_mass_kg,
        trials,
    })
}

/// Copy of `ds` whose session labels are shuffled across trials by a seeded
/// permutation (15 trials per label are kept). Used as a chance-level control.
pub fn permute_labels(ds: &SubjectDataset, seed: u64) -> SubjectDataset {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sessions: Vec<u8> = ds.trials.iter().map(|t| t.session).collect();
    sessions.shuffle(&mut rng);
    let mut out = ds.clone();
    let mut counter = [0u8; N_SESSIONS];
    for (t, s) in out.trials.iter_mut().zip(sessions) {
        counter[s as usize - 1] += 1;
        t.session = s;
        t.trial = counter[s as usize - 1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every contiguous run, brute force.
    fn longest_run_oracle(v: &[f64], thr: f64) -> Option<Range<usize>> {
        let mut best: Option<Range<usize>> = None;
        for s in 0..v.len() {
            for e in s + 1..=v.len() {
                if v[s..e].iter().all(|&x| x >= thr)
                    && best.as_ref().map_or(true, |b| e - s > b.len())
                {
                    best = Some(s..e);
                }
            }
        }
        best
    }

    #[test]
    fn stance_direct_reading() {
        let v = [0.0, 5.0, 25.0, 400.0, 30.0, 5.0, 0.0];
        assert_eq!(extract_stance(&v, 20.0).unwrap(), 2..5);
    }

    #[test]
    fn stance_saturated() {
        let v = vec![500.0; 40];
        assert_eq!(extract_stance(&v, 20.0).unwrap(), 0..40);
    }

    #[test]
    fn stance_longest_run_wins() {
        let v = [0.0, 25.0, 25.0, 0.0, 25.0, 25.0, 25.0, 0.0];
        let got = extract_stance(&v, 20.0).unwrap();
        assert_eq!(got, 4..7);
        assert_eq!(Some(got), longest_run_oracle(&v, 20.0));
    }

    #[test]
    fn stance_tie_takes_earliest() {
        let v = [25.0, 25.0, 0.0, 25.0, 25.0];
        assert_eq!(extract_stance(&v, 20.0).unwrap(), 0..2);
    }

    #[test]
    fn stance_errors() {
        assert!(matches!(
            extract_stance(&[1.0, 2.0], 20.0),
            Err(Error::EmptyStance { .. })
        ));
        assert!(extract_stance(&[], 20.0).is_err());
    }

    #[test]
    fn stance_matches_oracle_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..30);
            let v: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.6) { 30.0 } else { 10.0 })
                .collect();
            match longest_run_oracle(&v, 20.0) {
                Some(r) => assert_eq!(extract_stance(&v, 20.0).unwrap(), r, "{v:?}"),
                None => assert!(extract_stance(&v, 20.0).is_err()),
            }
        }
    }

    #[test]
    fn stance_is_idempotent() {
        let ds = synthesize_dataset(1, 5).unwrap();
        for t in &ds[0].trials[..5] {
            let again = crop_to_stance(t.clone(), STANCE_THRESHOLD_N).unwrap();
            assert_eq!(&again, t);
        }
    }

    #[test]
    fn synth_is_deterministic() {
        let a = synthesize_dataset(2, 7).unwrap();
        let b = synthesize_dataset(2, 7).unwrap();
        assert_eq!(a, b);
        let c = synthesize_dataset(2, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synth_without_noise_repeats_trials() {
        let cfg = SynthConfig {
            noise_frac: 0.0,
            trial_jitter: 0.0,
            ..SynthConfig::default()
        };
        let ds = synthesize_dataset_with(1, 11, &cfg).unwrap();
        let s = &ds[0];
        for session in 0..N_SESSIONS {
            let block = &s.trials[session * 15..(session + 1) * 15];
            for t in &block[1..] {
                assert_eq!(t.left, block[0].left);
                assert_eq!(t.right, block[0].right);
            }
        }
        assert_ne!(s.trials[0].left, s.trials[15].left);
    }

    #[test]
    fn synth_trials_are_valid_and_shaped() {
        let ds = synthesize_dataset(1, 1).unwrap();
        let s = &ds[0];
        s.check_complete().unwrap();
        assert_eq!(s.labels().len(), 90);
        for t in &s.trials {
            let bw = t.body_weight;
            for foot in Foot::BOTH {
                let f = t.foot(foot);
                let ms = f.len() as f64 * 1000.0 / t.sample_rate;
                assert!((590.0..=810.0).contains(&ms), "{ms}");
                let peak = f.vertical.iter().cloned().fold(f64::MIN, f64::max);
                assert!((0.95..1.25).contains(&(peak / bw)), "{}", peak / bw);
                let mid = f.vertical[f.len() / 2] / bw;
                assert!((0.6..0.9).contains(&mid), "{mid}");
            }
        }
    }

    #[test]
    fn zero_subjects_rejected() {
        assert!(synthesize_dataset(0, 1).is_err());
    }

    #[test]
    fn permuted_labels_stay_balanced() {
        let ds = synthesize_dataset(1, 2).unwrap();
        let p = permute_labels(&ds[0], 9);
        let mut counts = [0; 6];
        for l in p.labels() {
            counts[l] += 1;
        }
        assert_eq!(counts, [15; 6]);
        assert_ne!(p.labels(), ds[0].labels());
    }
}
