//! D2D drop generation, ITU-R P.1411 line-of-sight path loss and the Monte-Carlo
//! experiment runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{strength_from_physical, ChannelMatrix, GdofTuple, PhysicalNetwork, PowerAlloc};
use crate::optimize::dgp::{decentralized_gp, DgpConfig};
use crate::optimize::gp::gp_power_control;
use crate::optimize::lp::max_weighted_gdof_lp;
use crate::optimize::pipeline::{gp_then_assignment_with, ACTIVE_GDOF_TOL};
use crate::power::{solve_power_auction, AuctionConfig};
use crate::schedule::{run_scheme, LinkGains, Priority, Scheme, SchedulerParams};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Tx-Rx distances are floored here so path loss stays defined for co-located devices.
pub const MIN_DISTANCE_M: f64 = 1.0;
/// Receiver placement attempts before giving up on a link.
pub const PLACEMENT_ATTEMPTS: usize = 1000;
/// Largest fraction of excluded drops for which aggregates stay valid.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub area_m: f64,
    pub n_links: usize,
    pub dist_range_m: [f64; 2],
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub antenna_height_m: f64,
    pub antenna_gain_db: f64,
    pub noise_figure_db: f64,
    pub carrier_hz: f64,
}

impl Scenario {
    fn base(n_links: usize) -> Self {
        Self {
            area_m: 1000.0,
            n_links,
            dist_range_m: [5.0, 30.0],
            bandwidth_hz: 5e6,
            tx_power_dbm: 20.0,
            noise_psd_dbm_hz: -174.0,
            antenna_height_m: 1.5,
            antenna_gain_db: -2.5,
            noise_figure_db: 7.0,
            carrier_hz: 2.4e9,
        }
    }

    /// Short links: 5-30 m, 5 MHz, 20 dBm.
    pub fn scenario1(n_links: usize) -> Self {
        Self::base(n_links)
    }

    /// Longer links: 10-60 m, 10 MHz, 30 dBm.
    pub fn scenario2(n_links: usize) -> Self {
        Self { dist_range_m: [10.0, 60.0], bandwidth_hz: 10e6, tx_power_dbm: 30.0, ..Self::base(n_links) }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_m", self.area_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("antenna_height_m", self.antenna_height_m),
            ("carrier_hz", self.carrier_hz),
            ("dist_range_m[0]", self.dist_range_m[0]),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("antenna_gain_db", self.antenna_gain_db),
            ("noise_figure_db", self.noise_figure_db),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidScenario(format!("{name} must be finite")));
            }
        }
        if self.n_links == 0 {
            return Err(Error::InvalidScenario("n_links must be at least 1".into()));
        }
        let [lo, hi] = self.dist_range_m;
        if !(hi.is_finite() && lo <= hi && hi < self.area_m) {
            return Err(Error::InvalidScenario(format!("distance range [{lo}, {hi}] must be ordered and below the area side")));
        }
        Ok(())
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_w(self.tx_power_dbm)
    }

    /// Thermal noise over the band plus the receiver noise figure.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_w(self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db)
    }
}

fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Dual-slope LoS path loss (dB): slope 20 dB/decade up to the breakpoint
/// `4 h^2 / lambda`, 40 dB/decade beyond. Both antennas at height `h_m`.
pub fn pathloss_itu1411_los(distance_m: f64, carrier_hz: f64, h_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::DomainError(distance_m));
    }
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let r_bp = breakpoint_distance(carrier_hz, h_m);
    let l_bp = (20.0 * (lambda * lambda / (8.0 * std::f64::consts::PI * h_m * h_m)).log10()).abs();
    let slope = if distance_m <= r_bp { 20.0 } else { 40.0 };
    Ok(l_bp + slope * (distance_m / r_bp).log10())
}

pub fn breakpoint_distance(carrier_hz: f64, h_m: f64) -> f64 {
    4.0 * h_m * h_m / (SPEED_OF_LIGHT / carrier_hz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropRecord {
    pub tx: Vec<[f64; 2]>,
    pub rx: Vec<[f64; 2]>,
    pub network: PhysicalNetwork,
    pub seed: u64,
}

impl DropRecord {
    pub fn link_distance(&self, k: usize) -> f64 {
        distance(self.tx[k], self.rx[k])
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Tx uniform in the square; paired Rx at a uniform distance and uniform angle, the
/// angle resampled until the Rx falls inside the square.
pub fn generate_drop(scenario: &Scenario, seed: u64) -> Result<DropRecord> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scenario.n_links;
    let side = scenario.area_m;
    let [lo, hi] = scenario.dist_range_m;
    let mut tx = Vec::with_capacity(n);
    let mut rx = Vec::with_capacity(n);
    for _ in 0..n {
        let t = [rng.random_range(0.0..side), rng.random_range(0.0..side)];
        let mut placed = None;
        // Only the angle is redrawn, so the link length stays uniform.
        let d = if hi > lo { rng.random_range(lo..hi) } else { lo };
        for _ in 0..PLACEMENT_ATTEMPTS {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r = [t[0] + d * theta.cos(), t[1] + d * theta.sin()];
            if (0.0..=side).contains(&r[0]) && (0.0..=side).contains(&r[1]) {
                placed = Some(r);
                break;
            }
        }
        tx.push(t);
        rx.push(placed.ok_or(Error::RegionTooTight(PLACEMENT_ATTEMPTS))?);
    }

    let gain_db = 2.0 * scenario.antenna_gain_db;
    let mut gains = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = distance(tx[i], rx[j]).max(MIN_DISTANCE_M);
            let loss = pathloss_itu1411_los(d, scenario.carrier_hz, scenario.antenna_height_m)?;
            gains.push(10f64.powf((gain_db - loss) / 10.0));
        }
    }
    let p_max = scenario.tx_power_w();
    let noise = scenario.noise_power_w();
    let reference = gains.iter().map(|g| g * p_max / noise).fold(0.0, f64::max);
    if !(reference > 1.0) {
        return Err(Error::InvalidScenario("no link exceeds 0 dB SNR; the GDoF scale is undefined".into()));
    }
    let network = PhysicalNetwork::new(n, gains, vec![p_max; n], noise, reference)?;
    Ok(DropRecord { tx, rx, network, seed })
}

/// Synthetic strengths: directs uniform in `[1, 2]`, cross links uniform in `[0, 1]`,
/// realized with `G = P^alpha`, unit noise and unit power caps.
pub fn synthetic_network(n_links: usize, snr_db: f64, seed: u64) -> Result<PhysicalNetwork> {
    if n_links == 0 {
        return Err(Error::InvalidScenario("n_links must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha: Vec<f64> = (0..n_links * n_links)
        .map(|e| if e / n_links == e % n_links { rng.random_range(1.0..2.0) } else { rng.random_range(0.0..1.0) })
        .collect();
    PhysicalNetwork::from_strengths(&ChannelMatrix::from_flat(n_links, alpha)?, 10f64.powf(snr_db / 10.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Setup {
    Geometric { scenario: Scenario },
    Synthetic { n_links: usize, snr_db: f64 },
}

impl Setup {
    pub fn n_links(&self) -> usize {
        match self {
            Setup::Geometric { scenario } => scenario.n_links,
            Setup::Synthetic { n_links, .. } => *n_links,
        }
    }

    /// Network for one drop and the bandwidth used for bits per joule.
    pub fn network(&self, seed: u64) -> Result<(PhysicalNetwork, f64)> {
        match self {
            Setup::Geometric { scenario } => Ok((generate_drop(scenario, seed)?.network, scenario.bandwidth_hz)),
            Setup::Synthetic { n_links, snr_db } => Ok((synthetic_network(*n_links, *snr_db, seed)?, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "none")]
    NoScheduling,
    #[serde(rename = "flashlinq")]
    FlashLinQ,
    #[serde(rename = "itlinq")]
    ItLinQ,
    #[serde(rename = "itlinq+")]
    ItLinQPlus,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::NoScheduling, SchemeId::FlashLinQ, SchemeId::ItLinQ, SchemeId::ItLinQPlus];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::NoScheduling => "none",
            SchemeId::FlashLinQ => "flashlinq",
            SchemeId::ItLinQ => "itlinq",
            SchemeId::ItLinQPlus => "itlinq+",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(SchemeId::NoScheduling),
            other => Scheme::parse(other).map(|s| match s {
                Scheme::FlashLinQ => SchemeId::FlashLinQ,
                Scheme::ItLinQ => SchemeId::ItLinQ,
                Scheme::ItLinQPlus => SchemeId::ItLinQPlus,
            }),
        }
    }

    fn scheduler(self) -> Option<Scheme> {
        match self {
            SchemeId::NoScheduling => None,
            SchemeId::FlashLinQ => Some(Scheme::FlashLinQ),
            SchemeId::ItLinQ => Some(Scheme::ItLinQ),
            SchemeId::ItLinQPlus => Some(Scheme::ItLinQPlus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PowerMode {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "gp")]
    Gp,
    #[serde(rename = "gp+assignment")]
    GpAssignment,
    #[serde(rename = "lp+assignment")]
    LpAssignment,
    #[serde(rename = "dgp+assignment")]
    DgpAssignment,
}

impl PowerMode {
    pub const ALL: [PowerMode; 5] =
        [PowerMode::Full, PowerMode::Gp, PowerMode::GpAssignment, PowerMode::LpAssignment, PowerMode::DgpAssignment];

    pub fn name(self) -> &'static str {
        match self {
            PowerMode::Full => "full",
            PowerMode::Gp => "gp",
            PowerMode::GpAssignment => "gp+assignment",
            PowerMode::LpAssignment => "lp+assignment",
            PowerMode::DgpAssignment => "dgp+assignment",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        PowerMode::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub setup: Setup,
    pub schemes: Vec<SchemeId>,
    pub power_modes: Vec<PowerMode>,
    pub n_drops: usize,
    pub master_seed: u64,
    pub params: SchedulerParams,
    pub auction: AuctionConfig,
}

impl ExperimentConfig {
    pub fn new(setup: Setup, schemes: Vec<SchemeId>, power_modes: Vec<PowerMode>, n_drops: usize, master_seed: u64) -> Self {
        Self {
            setup,
            schemes,
            power_modes,
            n_drops,
            master_seed,
            params: SchedulerParams::default(),
            auction: AuctionConfig { epsilon: 1e-4, snap: true, max_bids: None },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub scheme: SchemeId,
    pub power_mode: PowerMode,
    pub n_links: usize,
    pub drop_index: usize,
    pub drop_seed: u64,
    /// `sum log2(1 + SINR)` over active links.
    pub sum_tput_bps_hz: f64,
    /// Sum rate times bandwidth over total transmit power; 0 when nothing transmits.
    pub energy_bits_per_joule: f64,
    pub active_links: usize,
    /// Transmit power per link in watts.
    pub powers_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub scheme: SchemeId,
    pub power_mode: PowerMode,
    pub drops: usize,
    pub excluded: usize,
    pub tput_mean: f64,
    pub tput_ci95: f64,
    pub energy_mean: f64,
    pub energy_ci95: f64,
    /// False when more than 1% of drops were excluded.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub scheme: SchemeId,
    pub power_mode: PowerMode,
    pub drop_seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<MetricRow>,
    pub exclusions: Vec<Exclusion>,
    pub aggregates: Vec<Aggregate>,
}

/// Seed of drop `index`: a SplitMix64 step over the master seed and the counter.
pub fn drop_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fractions_from_exponents(r: &PowerAlloc, reference_power: f64) -> Vec<f64> {
    r.iter()
        .map(|&x| if x == f64::NEG_INFINITY { 0.0 } else { reference_power.powf(x.min(0.0)) })
        .collect()
}

/// Least powers achieving `d` on its support, as fractions of the caps.
fn assignment_fractions(alpha: &ChannelMatrix, d: &GdofTuple, reference_power: f64, auction: AuctionConfig) -> Result<Vec<f64>> {
    let support = d.support(ACTIVE_GDOF_TOL);
    if support.is_empty() {
        return Ok(vec![0.0; alpha.k()]);
    }
    let r = solve_power_auction(alpha, d, &support, auction)?.r;
    Ok(fractions_from_exponents(&r, reference_power))
}

/// Power fractions for the active links under one power mode.
fn allocate(net: &PhysicalNetwork, active: &[usize], mode: PowerMode, auction: AuctionConfig) -> Result<Vec<f64>> {
    let k = net.k;
    if active.is_empty() {
        return Ok(vec![0.0; k]);
    }
    let mut w = vec![0.0; k];
    for &u in active {
        w[u] = 1.0;
    }
    match mode {
        PowerMode::Full => Ok(w),
        PowerMode::Gp => Ok(gp_power_control(net, active, &w)?.powers),
        PowerMode::GpAssignment => {
            let res = gp_then_assignment_with(net, active, &w, auction)?;
            Ok(fractions_from_exponents(&res.r_min, net.reference_power))
        }
        PowerMode::LpAssignment => {
            let alpha = strength_from_physical(net)?;
            let (d, _) = max_weighted_gdof_lp(&alpha, active, &w)?;
            assignment_fractions(&alpha, &d, net.reference_power, auction)
        }
        PowerMode::DgpAssignment => {
            let alpha = strength_from_physical(net)?;
            let res = decentralized_gp(&alpha, active, &w, DgpConfig::default())?;
            assignment_fractions(&alpha, &res.d, net.reference_power, auction)
        }
    }
}

fn evaluate(
    net: &PhysicalNetwork,
    bandwidth: f64,
    scheme: SchemeId,
    mode: PowerMode,
    params: &SchedulerParams,
    auction: AuctionConfig,
) -> Result<(f64, f64, usize, Vec<f64>)> {
    let active = match scheme.scheduler() {
        None => (0..net.k).collect(),
        Some(s) => {
            let order = Priority::RoundRobin { slot: 0 }.resolve(net.k)?;
            run_scheme(s, &LinkGains::from_network(net), &order, params)?.active_sorted()
        }
    };
    let fractions = allocate(net, &active, mode, auction)?;
    let powers_w: Vec<f64> = fractions.iter().zip(&net.max_tx_power).map(|(f, p)| f.clamp(0.0, 1.0) * p).collect();
    let sinr = net.sinr_at_powers(&powers_w);
    let mut tput = 0.0;
    let mut on = 0;
    for u in 0..net.k {
        if powers_w[u] > 0.0 {
            tput += sinr[u].ln_1p() / std::f64::consts::LN_2;
            on += 1;
        }
    }
    let total: f64 = powers_w.iter().sum();
    let energy = if total > 0.0 { tput * bandwidth / total } else { 0.0 };
    Ok((tput, energy, on, powers_w))
}

struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn new() -> Self {
        Self { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Mean and 95% normal-approximation half-width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut s = KahanSum::new();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut v = KahanSum::new();
    xs.iter().for_each(|&x| v.add((x - mean).powi(2)));
    let sd = (v.sum / (n - 1) as f64).sqrt();
    (mean, 1.96 * sd / (n as f64).sqrt())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(cfg, Exec::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    if cfg.n_drops == 0 {
        return Err(Error::InvalidArgument("at least one drop is required".into()));
    }
    if cfg.schemes.is_empty() || cfg.power_modes.is_empty() {
        return Err(Error::InvalidArgument("at least one scheme and one power mode are required".into()));
    }
    cfg.params.validate()?;
    if let Setup::Geometric { scenario } = &cfg.setup {
        scenario.validate()?;
    }
    let n_links = cfg.setup.n_links();
    let per_drop = exec.map_range(cfg.n_drops, |i| -> Result<Vec<std::result::Result<MetricRow, Exclusion>>> {
        let seed = drop_seed(cfg.master_seed, i);
        let (net, bandwidth) = cfg.setup.network(seed)?;
        let mut out = Vec::with_capacity(cfg.schemes.len() * cfg.power_modes.len());
        for &scheme in &cfg.schemes {
            for &mode in &cfg.power_modes {
                out.push(match evaluate(&net, bandwidth, scheme, mode, &cfg.params, cfg.auction) {
                    Ok((tput, energy, active, powers_w)) => Ok(MetricRow {
                        scheme,
                        power_mode: mode,
                        n_links,
                        drop_index: i,
                        drop_seed: seed,
                        sum_tput_bps_hz: tput,
                        energy_bits_per_joule: energy,
                        active_links: active,
                        powers_w,
                    }),
                    Err(e) => Err(Exclusion { scheme, power_mode: mode, drop_seed: seed, reason: e.to_string() }),
                });
            }
        }
        Ok(out)
    });

    let mut rows = Vec::new();
    let mut exclusions = Vec::new();
    for drop in per_drop {
        for item in drop? {
            match item {
                Ok(r) => rows.push(r),
                Err(x) => exclusions.push(x),
            }
        }
    }
    let mut aggregates = Vec::new();
    for &scheme in &cfg.schemes {
        for &mode in &cfg.power_modes {
            let mine: Vec<&MetricRow> = rows.iter().filter(|r| r.scheme == scheme && r.power_mode == mode).collect();
            let tput: Vec<f64> = mine.iter().map(|r| r.sum_tput_bps_hz).collect();
            let energy: Vec<f64> = mine.iter().map(|r| r.energy_bits_per_joule).collect();
            let excluded = exclusions.iter().filter(|x| x.scheme == scheme && x.power_mode == mode).count();
            let (tput_mean, tput_ci95) = mean_ci95(&tput);
            let (energy_mean, energy_ci95) = mean_ci95(&energy);
            aggregates.push(Aggregate {
                scheme,
                power_mode: mode,
                drops: mine.len(),
                excluded,
                tput_mean,
                tput_ci95,
                energy_mean,
                energy_ci95,
                valid: !mine.is_empty() && excluded as f64 <= MAX_EXCLUDED_FRACTION * cfg.n_drops as f64,
            });
        }
    }
    Ok(ExperimentResult { rows, exclusions, aggregates })
}

impl ExperimentResult {
    pub fn aggregate(&self, scheme: SchemeId, mode: PowerMode) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.scheme == scheme && a.power_mode == mode)
    }

    /// Per-drop differences `metric(a) - metric(b)` over drops where both succeeded:
    /// mean and 95% half-width.
    pub fn paired_gap(
        &self,
        a: (SchemeId, PowerMode),
        b: (SchemeId, PowerMode),
        metric: impl Fn(&MetricRow) -> f64,
    ) -> (f64, f64, usize) {
        let pick = |key: (SchemeId, PowerMode)| -> std::collections::BTreeMap<usize, f64> {
            self.rows
                .iter()
                .filter(|r| (r.scheme, r.power_mode) == key)
                .map(|r| (r.drop_index, metric(r)))
                .collect()
        };
        let (ma, mb) = (pick(a), pick(b));
        let diffs: Vec<f64> = ma.iter().filter_map(|(i, x)| mb.get(i).map(|y| x - y)).collect();
        let (m, h) = mean_ci95(&diffs);
        (m, h, diffs.len())
    }
}

/// Rounds to 12 significant digits, then prints the shortest round-trip form.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

pub const CSV_HEADER: &str = "scheme,power_mode,n_links,drop_seed,sum_tput_bps_hz,energy_bits_per_joule,active_links";

pub fn write_csv(rows: &[MetricRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme.name(),
            r.power_mode.name(),
            r.n_links,
            r.drop_seed,
            format_float(r.sum_tput_bps_hz),
            format_float(r.energy_bits_per_joule),
            r.active_links
        ));
    }
    out
}
