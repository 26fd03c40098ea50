//! Domain types shared by every stage of the harness.
//!
//! Everything here is an immutable value object. A [`ForceTrial`] carries its
//! subject/session/trial identity so per-subject processing can never mix
//! subjects, and a [`CombinationSpec`] is one point of the
//! preprocessing × classifier grid.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const N_SESSIONS: usize = 6;
pub const TRIALS_PER_SESSION: usize = 15;
pub const TRIALS_PER_SUBJECT: usize = N_SESSIONS * TRIALS_PER_SESSION;
pub const N_CLASSES: usize = N_SESSIONS;
/// Vertical force threshold delimiting the stance phase, in Newtons.
pub const STANCE_THRESHOLD_N: f64 = 20.0;
pub const GRAVITY: f64 = 9.81;

/// Three force channels of one foot over the stance phase, in Newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct FootForces {
    pub fore_aft: Vec<f64>,
    pub medio_lateral: Vec<f64>,
    pub vertical: Vec<f64>,
}

impl FootForces {
    pub fn new(fore_aft: Vec<f64>, medio_lateral: Vec<f64>, vertical: Vec<f64>) -> Self {
        Self {
            fore_aft,
            medio_lateral,
            vertical,
        }
    }

    pub fn len(&self) -> usize {
        self.vertical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertical.is_empty()
    }

    /// Channels in canonical order: fore-aft, medio-lateral, vertical.
    pub fn channels(&self) -> [&[f64]; 3] {
        [&self.fore_aft, &self.medio_lateral, &self.vertical]
    }

    pub fn from_channels([fore_aft, medio_lateral, vertical]: [Vec<f64>; 3]) -> Self {
        Self::new(fore_aft, medio_lateral, vertical)
    }

    pub fn map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        Ok(Self::new(
            f(&self.fore_aft)?,
            f(&self.medio_lateral)?,
            f(&self.vertical)?,
        ))
    }

    /// Sub-range of all three channels.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self::new(
            self.fore_aft[range.clone()].to_vec(),
            self.medio_lateral[range.clone()].to_vec(),
            self.vertical[range].to_vec(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub const BOTH: [Foot; 2] = [Foot::Left, Foot::Right];

    pub fn code(self) -> &'static str {
        match self {
            Foot::Left => "L",
            Foot::Right => "R",
        }
    }
}

/// One gait trial: both feet's stance-phase forces plus identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTrial {
    pub subject_id: String,
    /// 1..=6
    pub session: u8,
    /// 1..=15
    pub trial: u8,
    pub sample_rate: f64,
    pub left: FootForces,
    pub right: FootForces,
    /// Newtons, measured for this trial's session.
    pub body_weight: f64,
}

impl ForceTrial {
    pub fn foot(&self, foot: Foot) -> &FootForces {
        match foot {
            Foot::Left => &self.left,
            Foot::Right => &self.right,
        }
    }

    /// `subject/session/trial` label used in error messages.
    pub fn identity(&self) -> String {
        format!("{}/s{}/t{}", self.subject_id, self.session, self.trial)
    }

    /// Class index 0..6 derived from the session number.
    pub fn label(&self) -> usize {
        self.session as usize - 1
    }
}

/// Checks every [`ForceTrial`] invariant and hands the trial back unchanged.
pub fn validate_trial(trial: ForceTrial) -> Result<ForceTrial> {
    let fail = |msg: String| Error::InvalidTrial {
        trial: trial.identity(),
        msg,
    };
    if !(1..=N_SESSIONS as u8).contains(&trial.session) {
        return Err(fail(format!("session {} outside 1..=6", trial.session)));
    }
    if !(1..=TRIALS_PER_SESSION as u8).contains(&trial.trial) {
        return Err(fail(format!("trial {} outside 1..=15", trial.trial)));
    }
    if !(trial.sample_rate.is_finite() && trial.sample_rate > 0.0) {
        return Err(fail(format!("sample rate {} not positive", trial.sample_rate)));
    }
    if !(trial.body_weight.is_finite() && trial.body_weight > 0.0) {
        return Err(fail(format!(
            "body weight {} N is not positive",
            trial.body_weight
        )));
    }
    for foot in Foot::BOTH {
        let forces = trial.foot(foot);
        let n = forces.vertical.len();
        let names = ["fore_aft", "medio_lateral"];
        for (name, ch) in names.iter().zip([&forces.fore_aft, &forces.medio_lateral]) {
            if ch.len() != n {
                return Err(fail(format!(
                    "{} foot channel length mismatch: {} has {} samples, vertical has {}",
                    foot.code(),
                    name,
                    ch.len(),
                    n
                )));
            }
        }
        if n < 2 {
            return Err(fail(format!("{} foot has {} samples, need >= 2", foot.code(), n)));
        }
        if let Some(bad) = forces
            .channels()
            .iter()
            .flat_map(|c| c.iter())
            .find(|v| !v.is_finite())
        {
            return Err(fail(format!("{} foot holds non-finite sample {}", foot.code(), bad)));
        }
        if let Some((i, v)) = forces.vertical[1..n - 1]
            .iter()
            .enumerate()
            .find(|(_, &v)| v < STANCE_THRESHOLD_N)
        {
            return Err(fail(format!(
                "{} foot vertical force {:.3} N at interior sample {} is below the {} N threshold",
                foot.code(),
                v,
                i + 1,
                STANCE_THRESHOLD_N
            )));
        }
    }
    Ok(trial)
}

macro_rules! code_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $code:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn code(self) -> &'static str {
                match self {
                    $($name::$variant => $code),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($code => Ok($name::$variant),)+
                    other => Err(Error::InvalidArgument(format!(
                        "unknown {} value {:?} (expected one of: {})",
                        stringify!($name),
                        other,
                        [$($code),+].join(", ")
                    ))),
                }
            }
        }
    };
}

code_enum!(
    /// Step 1: GRF filtering.
    Filtering { None => "none", AutoCutoff => "auto_cutoff" }
);
code_enum!(
    /// Step 2: raw force or its first time derivative (jerk).
    Derivative { Grf => "grf", Jerk => "jerk" }
);
code_enum!(
    /// Step 3: number of time-normalized points.
    TimePoints { T11 => "11", T101 => "101", T1001 => "1001" }
);
code_enum!(
    /// Step 4: data reduction.
    Reduction { Tc => "tc", Td => "td", Pca => "pca" }
);
code_enum!(
    /// Step 5: body weight normalization.
    WeightNorm { No => "0", Yes => "1" }
);
code_enum!(
    /// Step 6: z-transform scope then min-max scope (`at` all trials, `st` single trial).
    Scaling {
        ZAtMmAt => "z_at_mm_at",
        ZAtMmSt => "z_at_mm_st",
        ZStMmAt => "z_st_mm_at",
        ZStMmSt => "z_st_mm_st",
    }
);
code_enum!(
    Classifier { Svm => "svm", Rfc => "rfc", Mlp => "mlp", Cnn => "cnn" }
);

impl TimePoints {
    pub fn count(self) -> usize {
        match self {
            TimePoints::T11 => 11,
            TimePoints::T101 => 101,
            TimePoints::T1001 => 1001,
        }
    }
}

impl WeightNorm {
    pub fn enabled(self) -> bool {
        self == WeightNorm::Yes
    }
}

/// Fitting scope of one scaling pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    AllTrials,
    SingleTrial,
}

impl Scaling {
    /// (z-transform scope, min-max scope)
    pub fn scopes(self) -> (Scope, Scope) {
        use Scope::*;
        match self {
            Scaling::ZAtMmAt => (AllTrials, AllTrials),
            Scaling::ZAtMmSt => (AllTrials, SingleTrial),
            Scaling::ZStMmAt => (SingleTrial, AllTrials),
            Scaling::ZStMmSt => (SingleTrial, SingleTrial),
        }
    }
}

/// The seven steps of the experiment grid, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Filtering,
    Derivative,
    TimePoints,
    Reduction,
    WeightNorm,
    Scaling,
    Classifier,
}

impl Step {
    pub const ALL: [Step; 7] = [
        Step::Filtering,
        Step::Derivative,
        Step::TimePoints,
        Step::Reduction,
        Step::WeightNorm,
        Step::Scaling,
        Step::Classifier,
    ];

    /// Key used in the text serialization and the filter language.
    pub fn key(self) -> &'static str {
        match self {
            Step::Filtering => "filtering",
            Step::Derivative => "deriv",
            Step::TimePoints => "T",
            Step::Reduction => "red",
            Step::WeightNorm => "wn",
            Step::Scaling => "scale",
            Step::Classifier => "clf",
        }
    }

    /// Column name in `results.csv`.
    pub fn column(self) -> &'static str {
        match self {
            Step::Filtering => "filtering",
            other => other.key(),
        }
    }

    pub fn from_key(key: &str) -> Result<Step> {
        Step::ALL
            .into_iter()
            .find(|s| s.key() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown combination key {key:?}")))
    }

    /// Method codes of this step in declaration order.
    pub fn methods(self) -> Vec<&'static str> {
        fn codes<T: Copy>(all: &[T], code: fn(T) -> &'static str) -> Vec<&'static str> {
            all.iter().map(|&v| code(v)).collect()
        }
        match self {
            Step::Filtering => codes(Filtering::ALL, Filtering::code),
            Step::Derivative => codes(Derivative::ALL, Derivative::code),
            Step::TimePoints => codes(TimePoints::ALL, TimePoints::code),
            Step::Reduction => codes(Reduction::ALL, Reduction::code),
            Step::WeightNorm => codes(WeightNorm::ALL, WeightNorm::code),
            Step::Scaling => codes(Scaling::ALL, Scaling::code),
            Step::Classifier => codes(Classifier::ALL, Classifier::code),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One point in the preprocessing × classifier grid.
///
/// Field order defines the enumeration order (derived `Ord` is lexicographic
/// over fields, each field ordered by declaration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombinationSpec {
    pub filtering: Filtering,
    pub derivative: Derivative,
    pub time_points: TimePoints,
    pub reduction: Reduction,
    pub weight_norm: WeightNorm,
    pub scaling: Scaling,
    pub classifier: Classifier,
}

impl CombinationSpec {
    pub fn method(&self, step: Step) -> &'static str {
        match step {
            Step::Filtering => self.filtering.code(),
            Step::Derivative => self.derivative.code(),
            Step::TimePoints => self.time_points.code(),
            Step::Reduction => self.reduction.code(),
            Step::WeightNorm => self.weight_norm.code(),
            Step::Scaling => self.scaling.code(),
            Step::Classifier => self.classifier.code(),
        }
    }

    fn set(&mut self, step: Step, value: &str) -> Result<()> {
        match step {
            Step::Filtering => self.filtering = value.parse()?,
            Step::Derivative => self.derivative = value.parse()?,
            Step::TimePoints => self.time_points = value.parse()?,
            Step::Reduction => self.reduction = value.parse()?,
            Step::WeightNorm => self.weight_norm = value.parse()?,
            Step::Scaling => self.scaling = value.parse()?,
            Step::Classifier => self.classifier = value.parse()?,
        }
        Ok(())
    }

    /// Single-trial scaling scopes are only defined for time-continuous
    /// waveforms; scalar td/pca features need all-trials scaling.
    pub fn check_supported(&self) -> Result<()> {
        if self.reduction != Reduction::Tc && self.scaling != Scaling::ZAtMmAt {
            return Err(Error::Unsupported(format!(
                "scaling {} needs single-trial statistics, undefined for {} features",
                self.scaling, self.reduction
            )));
        }
        Ok(())
    }

    pub fn is_supported(&self) -> bool {
        self.check_supported().is_ok()
    }

    /// The same spec with the classifier swapped out; specs that agree on
    /// everything but the classifier share their feature matrices.
    pub fn with_classifier(mut self, classifier: Classifier) -> Self {
        self.classifier = classifier;
        self
    }

    /// Builds a spec from the values of the seven steps (for tables indexed
    /// by `Step`).
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Step, &'a str)>,
    {
        let mut spec = enumerate_combinations(false)[0];
        let mut seen = [false; 7];
        for (step, value) in pairs {
            spec.set(step, value)?;
            seen[step as usize] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "combination is missing key {:?}",
                Step::ALL[i].key()
            )));
        }
        Ok(spec)
    }
}

impl fmt::Display for CombinationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Step::ALL
            .iter()
            .map(|&s| format!("{}={}", s.key(), self.method(s)))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for CombinationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::with_capacity(7);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("expected key=value, got {part:?}"))
            })?;
            pairs.push((Step::from_key(k.trim())?, v.trim()));
        }
        if pairs.len() != 7 {
            return Err(Error::InvalidArgument(format!(
                "combination {s:?} must set all 7 keys exactly once"
            )));
        }
        CombinationSpec::from_pairs(pairs)
    }
}

/// Every combination in lexicographic field order. With `restrict_scaling`
/// only `scale=z_at_mm_at` is kept.
pub fn enumerate_combinations(restrict_scaling: bool) -> Vec<CombinationSpec> {
    let scalings: &[Scaling] = if restrict_scaling {
        &[Scaling::ZAtMmAt]
    } else {
        Scaling::ALL
    };
    let mut out = Vec::with_capacity(1152);
    for &filtering in Filtering::ALL {
        for &derivative in Derivative::ALL {
            for &time_points in TimePoints::ALL {
                for &reduction in Reduction::ALL {
                    for &weight_norm in WeightNorm::ALL {
                        for &scaling in scalings {
                            for &classifier in Classifier::ALL {
                                out.push(CombinationSpec {
                                    filtering,
                                    derivative,
                                    time_points,
                                    reduction,
                                    weight_norm,
                                    scaling,
                                    classifier,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Filter over combinations written with the serialization keys, e.g.
/// `clf=svm;red=pca,tc`. Keys that are not mentioned match every value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecFilter {
    allowed: Vec<(Step, Vec<String>)>,
}

impl SpecFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn constrains(&self, step: Step) -> bool {
        self.allowed.iter().any(|(s, _)| *s == step)
    }

    pub fn matches(&self, spec: &CombinationSpec) -> bool {
        self.allowed
            .iter()
            .all(|(step, values)| values.iter().any(|v| v == spec.method(*step)))
    }

    /// Candidate specs for a run: the full grid filtered, where an
    /// unconstrained `scale` key defaults to the all-trials scaling.
    pub fn select(&self) -> Vec<CombinationSpec> {
        let restrict = !self.constrains(Step::Scaling);
        enumerate_combinations(restrict)
            .into_iter()
            .filter(|s| self.matches(s))
            .collect()
    }
}

impl FromStr for SpecFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut allowed: Vec<(Step, Vec<String>)> = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("filter term {part:?} is not key=value[,value]"))
            })?;
            let step = Step::from_key(k.trim())?;
            let methods = step.methods();
            let mut values = Vec::new();
            for value in v.split(',').map(str::trim) {
                if !methods.contains(&value) {
                    return Err(Error::InvalidArgument(format!(
                        "filter value {value:?} is not valid for key {:?} (expected one of: {})",
                        step.key(),
                        methods.join(", ")
                    )));
                }
                values.push(value.to_string());
            }
            match allowed.iter_mut().find(|(s, _)| *s == step) {
                Some((_, existing)) => existing.retain(|x| values.contains(x)),
                None => allowed.push((step, values)),
            }
        }
        Ok(Self { allowed })
    }
}

/// Shape of a feature vector; ties the vector length to the reduction path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureLayout {
    pub reduction: Reduction,
    pub time_points: TimePoints,
    pub derivative: Derivative,
    /// Waveform channels entering the reduction (3 per foot, both feet).
    pub channel_count: usize,
    /// Retained principal components; only meaningful for `Reduction::Pca`.
    pub components: usize,
}

impl FeatureLayout {
    pub fn new(reduction: Reduction, time_points: TimePoints, derivative: Derivative) -> Self {
        Self {
            reduction,
            time_points,
            derivative,
            channel_count: 6,
            components: 0,
        }
    }

    pub fn with_components(mut self, k: usize) -> Self {
        self.components = k;
        self
    }

    /// Expected vector length.
    pub fn len(&self) -> usize {
        match self.reduction {
            Reduction::Tc => self.time_points.count() * self.channel_count,
            Reduction::Td => match self.derivative {
                // 7 values + occurrences, per foot
                Derivative::Grf => 7 * 2 * 2,
                Derivative::Jerk => 6 * 2 * 2,
            },
            Reduction::Pca => self.components,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (channels, length) view used by the convolutional network.
    pub fn sequence_shape(&self) -> (usize, usize) {
        match self.reduction {
            Reduction::Tc => (self.channel_count, self.time_points.count()),
            _ => (1, self.len()),
        }
    }
}

/// Flattened classifier input for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, layout: FeatureLayout) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::InvalidArgument(format!(
                "feature vector has {} values, layout {:?} expects {}",
                values.len(),
                layout.reduction,
                layout.len()
            )));
        }
        Ok(Self { values, layout })
    }
}

/// One of the 15 stratified train/validation/test partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// One-vs-rest confusion counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Macro-averaged metrics for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Vec<ClassCounts>,
}
