//! Greedy link scheduling (FlashLinQ, ITLinQ, ITLinQ+), independent-set tests and the
//! drift-plus-penalty network-utility loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelMatrix, GdofTuple, PhysicalNetwork};
use crate::optimize::lp::{max_weighted_gdof_exact, max_weighted_gdof_lp};
use crate::region;

/// Relaxed-condition independent set: every member satisfies the relaxed strength
/// condition within the subnetwork.
pub fn itis_plus_check(alpha: &ChannelMatrix, subset: &[usize]) -> Result<bool> {
    let s = alpha.normalize_subset(subset)?;
    Ok(region::c1_holds_on(alpha, &s))
}

/// Independent set under the GNAJ condition within the subnetwork.
pub fn itis_check(alpha: &ChannelMatrix, subset: &[usize]) -> Result<bool> {
    let s = alpha.normalize_subset(subset)?;
    Ok(region::gnaj_holds_on(alpha, &s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "flashlinq")]
    FlashLinQ,
    #[serde(rename = "itlinq")]
    ItLinQ,
    #[serde(rename = "itlinq+")]
    ItLinQPlus,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::FlashLinQ => "flashlinq",
            Scheme::ItLinQ => "itlinq",
            Scheme::ItLinQPlus => "itlinq+",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "flashlinq" => Some(Scheme::FlashLinQ),
            "itlinq" => Some(Scheme::ItLinQ),
            "itlinq+" | "itlinq-plus" => Some(Scheme::ItLinQPlus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchedulerParams {
    /// ITLinQ+ exponent on the candidate's SNR.
    pub eta: f64,
    /// ITLinQ+ exponent on the weakest interfering link.
    pub gamma: f64,
    pub itlinq_eta: f64,
    pub itlinq_m_db: f64,
    pub flashlinq_sir_db: f64,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        Self { eta: 0.9, gamma: 0.1, itlinq_eta: 0.7, itlinq_m_db: 25.0, flashlinq_sir_db: 9.0 }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("gamma", self.gamma), ("itlinq eta", self.itlinq_eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !self.itlinq_m_db.is_finite() || !self.flashlinq_sir_db.is_finite() {
            return Err(Error::InvalidArgument("scheduler thresholds must be finite".into()));
        }
        Ok(())
    }
}

/// Noise-normalized full-power link strengths: `snr[k]` and `inr[i * n + j]` for Tx-i to Rx-j.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub n: usize,
    pub snr: Vec<f64>,
    pub inr: Vec<f64>,
}

impl LinkGains {
    pub fn new(n: usize, snr: Vec<f64>, inr: Vec<f64>) -> Result<Self> {
        if snr.len() != n {
            return Err(Error::ShapeError { expected: n, got: snr.len() });
        }
        if inr.len() != n * n {
            return Err(Error::ShapeError { expected: n * n, got: inr.len() });
        }
        if snr.iter().chain(&inr).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidChannel("SNR and INR values must be finite and non-negative".into()));
        }
        Ok(Self { n, snr, inr })
    }

    /// `SNR_k = P^{alpha_kk}`, `INR_ij = P^{alpha_ij}`.
    pub fn from_strengths(alpha: &ChannelMatrix, reference_power: f64) -> Self {
        let n = alpha.k();
        let snr = (0..n).map(|k| reference_power.powf(alpha.direct(k))).collect();
        let inr = alpha.as_slice().iter().map(|a| reference_power.powf(*a)).collect();
        Self { n, snr, inr }
    }

    pub fn from_network(net: &PhysicalNetwork) -> Self {
        let inr = net.normalized_gains();
        let snr = (0..net.k).map(|k| inr[k * net.k + k]).collect();
        Self { n: net.k, snr, inr }
    }

    #[inline]
    pub fn inr(&self, tx: usize, rx: usize) -> f64 {
        self.inr[tx * self.n + rx]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Priority {
    /// Explicit order, highest priority first.
    Order { order: Vec<usize> },
    /// Index order rotated by the slot number.
    RoundRobin { slot: usize },
    /// Descending weight; ties go to the lower index.
    Weights { weights: Vec<f64> },
}

impl Priority {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Priority::Order { order } => {
                let mut seen = vec![false; n];
                for &u in order {
                    if u >= n {
                        return Err(Error::IndexError { index: u, k: n });
                    }
                    if std::mem::replace(&mut seen[u], true) {
                        return Err(Error::InvalidArgument(format!("link {u} appears twice in the priority order")));
                    }
                }
                Ok(order.clone())
            }
            Priority::RoundRobin { slot } => {
                if n == 0 {
                    return Ok(Vec::new());
                }
                let s = slot % n;
                Ok((s..n).chain(0..s).collect())
            }
            Priority::Weights { weights } => {
                if weights.len() != n {
                    return Err(Error::ShapeError { expected: n, got: weights.len() });
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
                Ok(order)
            }
        }
    }
}

/// Control messages exchanged during one scheduling pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SignallingTally {
    /// Channel-estimation pilots (one per device per round).
    pub pilot_messages: usize,
    /// Running-minimum INR broadcasts after admissions.
    pub min_inr_broadcasts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// Admitted links in admission order.
    pub admitted: Vec<usize>,
    pub signalling: SignallingTally,
    /// Weakest incoming interference at each admitted receiver (1 when none).
    pub min_incoming: Vec<f64>,
    /// Weakest outgoing interference from each admitted transmitter (1 when none).
    pub min_outgoing: Vec<f64>,
}

impl Schedule {
    pub fn active_sorted(&self) -> Vec<usize> {
        let mut v = self.admitted.clone();
        v.sort_unstable();
        v
    }
}

fn check_order(g: &LinkGains, order: &[usize]) -> Result<()> {
    Priority::Order { order: order.to_vec() }.resolve(g.n).map(|_| ())
}

fn pairwise_greedy(g: &LinkGains, order: &[usize], pilot_rounds: usize, admit: impl Fn(usize, usize) -> bool) -> Result<Schedule> {
    check_order(g, order)?;
    let mut admitted: Vec<usize> = Vec::new();
    for &k in order {
        if admitted.iter().all(|&j| admit(k, j)) {
            admitted.push(k);
        }
    }
    let m = admitted.len();
    Ok(Schedule {
        admitted,
        signalling: SignallingTally { pilot_messages: pilot_rounds * order.len(), min_inr_broadcasts: 0 },
        min_incoming: vec![1.0; m],
        min_outgoing: vec![1.0; m],
    })
}

/// Admits link k iff `SNR_k / INR_kj` and `SNR_j / INR_jk` both reach the SIR threshold
/// against every admitted link j.
pub fn flashlinq_schedule(g: &LinkGains, order: &[usize], sir_db: f64) -> Result<Schedule> {
    let theta = 10f64.powf(sir_db / 10.0);
    pairwise_greedy(g, order, 1, |k, j| {
        g.snr[k] >= theta * g.inr(j, k) && g.snr[j] >= theta * g.inr(k, j)
    })
}

/// Admits link k iff `M * SNR_k^eta` dominates both the caused and the received
/// interference against every admitted link.
pub fn itlinq_schedule(g: &LinkGains, order: &[usize], eta: f64, m_db: f64) -> Result<Schedule> {
    let m = 10f64.powf(m_db / 10.0);
    pairwise_greedy(g, order, 2, |k, j| {
        let lhs = m * g.snr[k].powf(eta);
        lhs >= g.inr(k, j) && lhs >= g.inr(j, k)
    })
}

/// Greedy pass with the exponent-scaled tests against the running weakest-interference tables.
pub fn itlinq_plus_schedule(g: &LinkGains, order: &[usize], eta: f64, gamma: f64) -> Result<Schedule> {
    check_order(g, order)?;
    let mut admitted: Vec<usize> = Vec::new();
    // Per admitted position: weakest INR into its Rx / out of its Tx from other admitted links.
    let mut min_in: Vec<Option<f64>> = Vec::new();
    let mut min_out: Vec<Option<f64>> = Vec::new();
    let mut broadcasts = 0usize;
    for &k in order {
        let lhs = g.snr[k].powf(eta);
        let ok = admitted.iter().enumerate().all(|(p, &j)| {
            let tx = g.inr(k, j) / min_in[p].unwrap_or(1.0).powf(gamma);
            let rx = g.inr(j, k) / min_out[p].unwrap_or(1.0).powf(gamma);
            lhs >= tx && lhs >= rx
        });
        if !ok {
            continue;
        }
        let mut own_in: Option<f64> = None;
        let mut own_out: Option<f64> = None;
        for (p, &j) in admitted.iter().enumerate() {
            let into_j = g.inr(k, j);
            if min_in[p].is_none_or(|v| into_j < v) {
                min_in[p] = Some(into_j);
                broadcasts += 1;
            }
            let out_of_j = g.inr(j, k);
            if min_out[p].is_none_or(|v| out_of_j < v) {
                min_out[p] = Some(out_of_j);
                broadcasts += 1;
            }
            own_in = Some(own_in.map_or(out_of_j, |v: f64| v.min(out_of_j)));
            own_out = Some(own_out.map_or(into_j, |v: f64| v.min(into_j)));
        }
        if own_in.is_some() {
            broadcasts += 2;
        }
        admitted.push(k);
        min_in.push(own_in);
        min_out.push(own_out);
    }
    Ok(Schedule {
        admitted,
        signalling: SignallingTally { pilot_messages: 2 * order.len(), min_inr_broadcasts: broadcasts },
        min_incoming: min_in.into_iter().map(|v| v.unwrap_or(1.0)).collect(),
        min_outgoing: min_out.into_iter().map(|v| v.unwrap_or(1.0)).collect(),
    })
}

pub fn run_scheme(scheme: Scheme, g: &LinkGains, order: &[usize], params: &SchedulerParams) -> Result<Schedule> {
    params.validate()?;
    match scheme {
        Scheme::FlashLinQ => flashlinq_schedule(g, order, params.flashlinq_sir_db),
        Scheme::ItLinQ => itlinq_schedule(g, order, params.itlinq_eta, params.itlinq_m_db),
        Scheme::ItLinQPlus => itlinq_plus_schedule(g, order, params.eta, params.gamma),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Utility {
    /// `U(a) = sum a_k`.
    Linear,
    /// `U(a) = sum a_k^{1 - alpha} / (1 - alpha)`; `alpha = 1` is `sum ln a_k`.
    AlphaFair(f64),
}

impl Utility {
    pub fn log() -> Self {
        Utility::AlphaFair(1.0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Utility::Linear => x.iter().sum(),
            Utility::AlphaFair(a) if (a - 1.0).abs() < 1e-12 => x.iter().map(|v| v.ln()).sum(),
            Utility::AlphaFair(a) => x.iter().map(|v| v.powf(1.0 - a) / (1.0 - a)).sum(),
        }
    }

    /// Maximizer of `V U(a) - sum w_k a_k` over `[0, A_max]^K`, coordinate by coordinate.
    pub fn arrivals(&self, w: &[f64], v: f64, a_max: f64) -> Vec<f64> {
        w.iter()
            .map(|&wk| match *self {
                Utility::Linear => {
                    if v >= wk {
                        a_max
                    } else {
                        0.0
                    }
                }
                Utility::AlphaFair(a) => {
                    if wk <= 0.0 {
                        a_max
                    } else {
                        (v / wk).powf(1.0 / a).clamp(0.0, a_max)
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumSolver {
    /// Exhaustive search over active subsets.
    Exact,
    /// LP over the polytope of the whole network.
    FullLp,
    /// ITLinQ+ in weight order, then the LP over the scheduled links.
    Scheduled { params: SchedulerParams, reference_power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumState {
    pub weights: Vec<f64>,
    pub v: f64,
    pub a_max: f64,
    pub utility: Utility,
    pub history: Vec<(GdofTuple, Vec<f64>)>,
}

impl NumState {
    /// Unit initial weights.
    pub fn new(k: usize, utility: Utility, v: f64, a_max: f64) -> Result<Self> {
        if !(v > 0.0 && a_max > 0.0) {
            return Err(Error::InvalidArgument("V and A_max must be positive".into()));
        }
        if let Utility::AlphaFair(a) = utility {
            if !(a > 0.0) {
                return Err(Error::InvalidArgument("fairness exponent must be positive".into()));
            }
        }
        Ok(Self { weights: vec![1.0; k], v, a_max, utility, history: Vec::new() })
    }
}

fn solve_weighted(alpha: &ChannelMatrix, w: &[f64], solver: &NumSolver) -> Result<GdofTuple> {
    let k = alpha.k();
    if !w.iter().any(|x| *x > 0.0) {
        return Ok(GdofTuple::zeros(k));
    }
    match solver {
        NumSolver::Exact => Ok(max_weighted_gdof_exact(alpha, w)?.0),
        NumSolver::FullLp => Ok(max_weighted_gdof_lp(alpha, &alpha.all_users(), w)?.0),
        NumSolver::Scheduled { params, reference_power } => {
            let g = LinkGains::from_strengths(alpha, *reference_power);
            let order = Priority::Weights { weights: w.to_vec() }.resolve(k)?;
            let order: Vec<usize> = order.into_iter().filter(|&u| w[u] > 0.0).collect();
            let sched = run_scheme(Scheme::ItLinQPlus, &g, &order, params)?;
            Ok(max_weighted_gdof_lp(alpha, &sched.active_sorted(), w)?.0)
        }
    }
}

/// One slot: serve the max-weight GDoF tuple, admit arrivals, update the weights.
pub fn num_step(state: &mut NumState, alpha: &ChannelMatrix, solver: &NumSolver) -> Result<(GdofTuple, Vec<f64>)> {
    if state.weights.len() != alpha.k() {
        return Err(Error::ShapeError { expected: alpha.k(), got: state.weights.len() });
    }
    let d = solve_weighted(alpha, &state.weights, solver)?;
    let a = state.utility.arrivals(&state.weights, state.v, state.a_max);
    for k in 0..alpha.k() {
        state.weights[k] = (state.weights[k] - d[k] + a[k]).max(0.0);
    }
    state.history.push((d.clone(), a.clone()));
    Ok((d, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumTrajectory {
    pub served: Vec<GdofTuple>,
    pub arrivals: Vec<Vec<f64>>,
    /// Time-averaged sum GDoF after each slot.
    pub running_sum: Vec<f64>,
    pub average: GdofTuple,
    /// Utility of the time-averaged served GDoF.
    pub utility: f64,
    pub final_weights: Vec<f64>,
    pub max_weight: f64,
}

pub fn num_run(alpha: &ChannelMatrix, utility: Utility, v: f64, a_max: f64, slots: usize, solver: &NumSolver) -> Result<NumTrajectory> {
    if slots == 0 {
        return Err(Error::InvalidArgument("at least one slot is required".into()));
    }
    let k = alpha.k();
    let mut state = NumState::new(k, utility, v, a_max)?;
    let mut totals = vec![0.0; k];
    let mut served = Vec::with_capacity(slots);
    let mut arrivals = Vec::with_capacity(slots);
    let mut running_sum = Vec::with_capacity(slots);
    let mut max_weight = 1.0f64;
    for t in 1..=slots {
        let (d, a) = num_step(&mut state, alpha, solver)?;
        for u in 0..k {
            totals[u] += d[u];
        }
        running_sum.push(totals.iter().sum::<f64>() / t as f64);
        max_weight = state.weights.iter().copied().fold(max_weight, f64::max);
        served.push(d);
        arrivals.push(a);
    }
    let average = GdofTuple(totals.iter().map(|x| x / slots as f64).collect());
    let utility_value = utility.value(&average);
    Ok(NumTrajectory {
        served,
        arrivals,
        running_sum,
        average,
        utility: utility_value,
        final_weights: state.weights,
        max_weight,
    })
}
