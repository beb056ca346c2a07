//! Report types and their JSON/CSV renderings.
//!
//! Exact quantities are written as `num/den` strings. Decimal values only
//! appear in fields under `approximate` or with an `_approx` suffix.

use buffon::{geometric_law, Constant, MassBracket, Rational, Summary, TailReport, Trace};
use serde::Serialize;

/// Largest `m` checked against the geometric law.
const GEOMETRIC_MAX_M: u64 = 15;

pub struct Rendered {
    pub json: String,
    pub csv: String,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn to_csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn field_rows(pairs: Vec<(&str, String)>) -> String {
    to_csv(&["field", "value"], pairs.into_iter().map(|(k, v)| [k.to_string(), v]))
}

#[derive(Serialize)]
struct ExactStats {
    ones: u64,
    sum_l: u64,
    sum_m: u64,
    sum_nm: u64,
    mean_y: Rational,
    mean_l: Rational,
    mean_m: Rational,
    mean_nm: Rational,
    max_l: u64,
    max_m: u64,
    max_nm: u64,
    nm_support: Vec<u64>,
}

#[derive(Serialize)]
struct ApproxStats {
    mean_y: f64,
    mean_l: f64,
    mean_m: f64,
    mean_nm: f64,
    mean_l_std_error: f64,
}

#[derive(Serialize)]
struct Checks {
    /// Tail cells above their bound by more than the sampling slack.
    tail_cells_flagged: usize,
    /// `2 ≤ mean_L ≤ 3` within 5 standard errors.
    mean_l_within_2_3: bool,
    /// `mean_M ≤ mean_L ≤ mean_M + 1`.
    mean_l_tracks_mean_m: bool,
    /// Every observed `N_M` is one of the schedule's `N_k`.
    nm_support_in_schedule: bool,
    /// `Pr[M ≥ m]` within 5σ of `2^{-m+1}` for `m ≤ 15`.
    geometric_law: bool,
}

#[derive(Serialize)]
pub struct EstimateReport {
    constant: String,
    trials: u64,
    seed: u64,
    shards: u64,
    prng: String,
    exact: ExactStats,
    approximate: ApproxStats,
    checks: Checks,
    pub flagged: bool,
    tails: TailReport,
}

impl EstimateReport {
    pub fn new(
        constant: &Constant,
        shards: u64,
        s: &Summary,
        tails: &TailReport,
        schedule_terms: &[u64],
    ) -> Self {
        let se = s.mean_l_std_error();
        let band = buffon::stats::SIGMA_BAND * se;
        let checks = Checks {
            tail_cells_flagged: tails
                .inputs
                .iter()
                .chain(&tails.terms)
                .filter(|r| r.flagged)
                .count(),
            mean_l_within_2_3: s.mean_l >= 2.0 - band && s.mean_l <= 3.0 + band,
            mean_l_tracks_mean_m: s.sum_m <= s.sum_l && s.sum_l <= s.sum_m + s.trials,
            nm_support_in_schedule: s.nm_support.iter().all(|n| schedule_terms.contains(n)),
            geometric_law: geometric_law(s, GEOMETRIC_MAX_M.min(s.max_m))
                .iter()
                .all(|r| r.within_band),
        };
        let flagged = checks.tail_cells_flagged > 0
            || !checks.mean_l_within_2_3
            || !checks.mean_l_tracks_mean_m
            || !checks.nm_support_in_schedule
            || !checks.geometric_law;
        EstimateReport {
            constant: constant.to_string(),
            trials: s.trials,
            seed: s.seed,
            shards,
            prng: s.prng.clone(),
            exact: ExactStats {
                ones: s.ones,
                sum_l: s.sum_l,
                sum_m: s.sum_m,
                sum_nm: s.sum_nm,
                mean_y: s.exact_mean(s.ones),
                mean_l: s.exact_mean(s.sum_l),
                mean_m: s.exact_mean(s.sum_m),
                mean_nm: s.exact_mean(s.sum_nm),
                max_l: s.max_l,
                max_m: s.max_m,
                max_nm: s.max_nm,
                nm_support: s.nm_support.clone(),
            },
            approximate: ApproxStats {
                mean_y: s.mean_y,
                mean_l: s.mean_l,
                mean_m: s.mean_m,
                mean_nm: s.mean_nm,
                mean_l_std_error: se,
            },
            checks,
            flagged,
            tails: tails.clone(),
        }
    }

    pub fn render(&self) -> Rendered {
        let e = &self.exact;
        let a = &self.approximate;
        let c = &self.checks;
        let csv = field_rows(vec![
            ("constant", self.constant.clone()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("shards", self.shards.to_string()),
            ("prng", self.prng.clone()),
            ("ones", e.ones.to_string()),
            ("mean_y", e.mean_y.to_string()),
            ("mean_l", e.mean_l.to_string()),
            ("mean_m", e.mean_m.to_string()),
            ("mean_nm", e.mean_nm.to_string()),
            ("max_l", e.max_l.to_string()),
            ("max_m", e.max_m.to_string()),
            ("max_nm", e.max_nm.to_string()),
            ("mean_y_approx", a.mean_y.to_string()),
            ("mean_l_approx", a.mean_l.to_string()),
            ("mean_m_approx", a.mean_m.to_string()),
            ("mean_nm_approx", a.mean_nm.to_string()),
            ("tail_cells_flagged", c.tail_cells_flagged.to_string()),
            ("mean_l_within_2_3", c.mean_l_within_2_3.to_string()),
            ("mean_l_tracks_mean_m", c.mean_l_tracks_mean_m.to_string()),
            ("nm_support_in_schedule", c.nm_support_in_schedule.to_string()),
            ("geometric_law", c.geometric_law.to_string()),
            ("flagged", self.flagged.to_string()),
        ]);
        Rendered {
            json: to_json(self),
            csv,
        }
    }
}

pub fn render_tails(tails: &TailReport) -> Rendered {
    let rows = [("L", &tails.inputs), ("N_M", &tails.terms)]
        .into_iter()
        .flat_map(|(name, rows)| {
            rows.iter().map(move |r| {
                [
                    name.to_string(),
                    r.index.to_string(),
                    r.exceedances.to_string(),
                    r.empirical.to_string(),
                    r.bound.to_string(),
                    r.bound_exact.to_string(),
                    r.reliable.to_string(),
                    r.flagged.to_string(),
                ]
            })
        });
    let csv = to_csv(
        &[
            "quantity",
            "index",
            "exceedances",
            "empirical_approx",
            "bound_approx",
            "bound",
            "reliable",
            "flagged",
        ],
        rows,
    );
    Rendered {
        json: to_json(tails),
        csv,
    }
}

#[derive(Serialize)]
struct ApproxBracket {
    p_one_low: f64,
    p_one_high: f64,
}

#[derive(Serialize)]
pub struct EnumerateReport {
    constant: String,
    depth: u64,
    p_one_low: Rational,
    unresolved: Rational,
    p_one_high: Rational,
    schedule: Vec<(u64, u8)>,
    approximate: ApproxBracket,
}

impl EnumerateReport {
    pub fn new(constant: &Constant, b: &MassBracket) -> Self {
        let high = b.p_one_high();
        EnumerateReport {
            constant: constant.to_string(),
            depth: b.depth,
            approximate: ApproxBracket {
                p_one_low: b.p_one_low.to_f64_approx(),
                p_one_high: high.to_f64_approx(),
            },
            p_one_low: b.p_one_low.clone(),
            unresolved: b.unresolved.clone(),
            p_one_high: high,
            schedule: b.schedule.clone(),
        }
    }

    pub fn render(&self) -> Rendered {
        let csv = field_rows(vec![
            ("constant", self.constant.clone()),
            ("depth", self.depth.to_string()),
            ("p_one_low", self.p_one_low.to_string()),
            ("unresolved", self.unresolved.to_string()),
            ("p_one_high", self.p_one_high.to_string()),
            ("p_one_low_approx", self.approximate.p_one_low.to_string()),
            ("p_one_high_approx", self.approximate.p_one_high.to_string()),
        ]);
        Rendered {
            json: to_json(self),
            csv,
        }
    }
}

fn schedule_cell(schedule: &[(u64, u8)]) -> String {
    schedule
        .iter()
        .map(|(n, s)| format!("{n}:{s}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn render_trace(t: &Trace) -> Rendered {
    let csv = to_csv(
        &["y", "m", "l", "n_m", "schedule"],
        [[
            t.y.to_string(),
            t.m.to_string(),
            t.l.to_string(),
            t.n_m.to_string(),
            schedule_cell(&t.schedule),
        ]],
    );
    Rendered {
        json: to_json(t),
        csv,
    }
}

#[derive(Serialize)]
struct PartialTrace<'a> {
    complete: bool,
    consumed: u64,
    schedule: &'a [(u64, u8)],
}

pub fn render_partial_trace(consumed: u64, schedule: &[(u64, u8)]) -> Rendered {
    let csv = to_csv(
        &["complete", "consumed", "schedule"],
        [[
            "false".to_string(),
            consumed.to_string(),
            schedule_cell(schedule),
        ]],
    );
    Rendered {
        json: to_json(&PartialTrace {
            complete: false,
            consumed,
            schedule,
        }),
        csv,
    }
}
