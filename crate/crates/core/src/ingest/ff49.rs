//! Daily industry-returns panel in the French Data Library CSV layout.

use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::instance::{InstanceKind, PortfolioInstance};
use crate::moments::equity_moments;

/// A dates × assets panel of daily simple returns (decimal fractions).
#[derive(Debug, Clone)]
pub struct ReturnsPanel {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    returns: Array2<f64>,
}

impl ReturnsPanel {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, returns: Array2<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != assets.len() {
            return Err(Error::Dimension(format!(
                "returns are {}x{} for {} dates and {} assets",
                returns.nrows(),
                returns.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData("dates are not strictly increasing".into()));
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("panel contains missing values".into()));
        }
        Ok(Self {
            dates,
            assets,
            returns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn returns(&self) -> &Array2<f64> {
        &self.returns
    }

    pub fn days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Row index range covering dates in [start, end], inclusive.
    pub fn date_range(&self, start: NaiveDate, end: NaiveDate) -> Range<usize> {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        lo..hi
    }
}

/// Missing-value sentinels used by the French Data Library files (percent
/// scale, before conversion).
const SENTINELS: [f64; 2] = [-99.99, -999.0];

fn is_sentinel(v: f64) -> bool {
    SENTINELS.iter().any(|s| (v - s).abs() < 1e-9)
}

/// Load the first daily data block of a French Data Library CSV: preamble
/// text, a header row of industry names (empty first cell), then rows of
/// YYYYMMDD dates and percent returns. Percent values are divided by 100;
/// calendar rows containing a sentinel (−99.99 or −999) in any column are
/// dropped before the panel is built.
pub fn load_ff49<P: AsRef<Path>>(path: P) -> Result<ReturnsPanel> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    parse_ff49(&text)
}

fn parse_ff49(text: &str) -> Result<ReturnsPanel> {
    let mut assets: Vec<String> = Vec::new();
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut in_data = false;

    for line in text.lines() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !in_data {
            // header row: empty first cell, remaining cells are names
            if fields.len() >= 2
                && fields[0].is_empty()
                && fields[1..]
                    .iter()
                    .all(|f| !f.is_empty() && f.chars().any(|c| c.is_alphabetic()))
            {
                assets = fields[1..].iter().map(|s| s.to_string()).collect();
                in_data = true;
            }
            continue;
        }
        // data rows: 8-digit date then one value per asset
        let first = fields[0];
        if first.len() != 8 || !first.chars().all(|c| c.is_ascii_digit()) {
            if dates.is_empty() {
                // stray line between header and data
                continue;
            }
            break; // end of the first data block
        }
        let date = NaiveDate::parse_from_str(first, "%Y%m%d")
            .map_err(|e| Error::InvalidData(format!("unparseable date '{first}': {e}")))?;
        if fields.len() != assets.len() + 1 {
            return Err(Error::InvalidData(format!(
                "row for {first} has {} values for {} assets",
                fields.len() - 1,
                assets.len()
            )));
        }
        let mut row = Vec::with_capacity(assets.len());
        let mut missing = false;
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|e| Error::InvalidData(format!("bad value '{f}' on {first}: {e}")))?;
            if is_sentinel(v) {
                missing = true;
                break;
            }
            row.push(v / 100.0);
        }
        if missing {
            continue;
        }
        dates.push(date);
        rows.push(row);
    }

    if assets.is_empty() {
        return Err(Error::InvalidData("no header row of industry names found".into()));
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("no data rows found".into()));
    }
    let mut returns = Array2::zeros((rows.len(), assets.len()));
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            returns[[r, c]] = *v;
        }
    }
    ReturnsPanel::new(dates, assets, returns)
}

/// Keep the top-n assets by absolute mean daily return over the window,
/// ordered by rank (ties to the lower original column index). n equal to the
/// full asset count returns the panel unchanged.
pub fn select_universe(
    panel: &ReturnsPanel,
    n: usize,
    window: (NaiveDate, NaiveDate),
) -> Result<ReturnsPanel> {
    if n > panel.n_assets() {
        return Err(Error::InvalidArgument(format!(
            "requested {n} assets from a panel of {}",
            panel.n_assets()
        )));
    }
    if n == panel.n_assets() {
        return Ok(panel.clone());
    }
    let rows = panel.date_range(window.0, window.1);
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "ranking window {} to {} covers no panel rows",
            window.0, window.1
        )));
    }
    let mut scored: Vec<(usize, f64)> = (0..panel.n_assets())
        .map(|c| {
            let mean: f64 = rows
                .clone()
                .map(|r| panel.returns[[r, c]])
                .sum::<f64>()
                / rows.len() as f64;
            (c, mean.abs())
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let picked: Vec<usize> = scored.iter().take(n).map(|&(c, _)| c).collect();

    let assets = picked.iter().map(|&c| panel.assets[c].clone()).collect();
    let mut returns = Array2::zeros((panel.days(), n));
    for (new_c, &c) in picked.iter().enumerate() {
        for r in 0..panel.days() {
            returns[[r, new_c]] = panel.returns[[r, c]];
        }
    }
    ReturnsPanel::new(panel.dates.clone(), assets, returns)
}

/// One rebalance: the estimation rows feeding the instance, and the
/// out-of-sample evaluation rows it is held over.
#[derive(Debug, Clone)]
pub struct RollingInstance {
    pub rebalance: NaiveDate,
    pub estimation: Range<usize>,
    pub evaluation: Range<usize>,
    pub instance: PortfolioInstance,
}

/// Monthly-rebalanced rolling instances: each rebalance date is the first
/// trading day of a calendar month with at least `window_days` trading days
/// strictly before it; the estimation window is those `window_days` rows and
/// the evaluation window runs to the next rebalance date (exclusive) or the
/// end of the panel.
pub fn rolling_instances(
    panel: &ReturnsPanel,
    window_days: usize,
    k: usize,
    lambda: f64,
    penalty_a: f64,
) -> Result<Vec<RollingInstance>> {
    if window_days < 2 {
        return Err(Error::InvalidArgument("window_days must be >= 2".into()));
    }
    let month_starts: Vec<usize> = (1..panel.days())
        .filter(|&t| {
            let (a, b) = (panel.dates[t - 1], panel.dates[t]);
            a.month() != b.month() || a.year() != b.year()
        })
        .collect();
    let qualifying: Vec<usize> = month_starts
        .iter()
        .copied()
        .filter(|&t| t >= window_days)
        .collect();
    if qualifying.is_empty() {
        return Err(Error::InvalidData(format!(
            "insufficient history: no month start with {window_days} prior trading days"
        )));
    }
    let mut out = Vec::with_capacity(qualifying.len());
    for (idx, &t) in qualifying.iter().enumerate() {
        let eval_end = qualifying.get(idx + 1).copied().unwrap_or(panel.days());
        let estimation = (t - window_days)..t;
        let window = panel.returns.slice(ndarray::s![estimation.clone(), ..]);
        let (mu, sigma) = equity_moments(window)?;
        let instance = PortfolioInstance::new(
            mu,
            sigma,
            lambda,
            penalty_a,
            k,
            panel.assets.clone(),
            InstanceKind::Equity,
        )?;
        out.push(RollingInstance {
            rebalance: panel.dates[t],
            estimation,
            evaluation: t..eval_end,
            instance,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sample_csv() -> String {
        let mut s = String::new();
        s.push_str("This file was created from daily returns data.\n");
        s.push_str("Missing data are indicated by -99.99.\n");
        s.push_str("\n");
        s.push_str(",Agric,Food,Soda\n");
        s.push_str("20200102,  1.23, -0.50,  0.10\n");
        s.push_str("20200103,  0.40,-99.99,  0.20\n");
        s.push_str("20200106, -0.10,  0.30,  0.05\n");
        s.push_str("\n");
        s.push_str("  Average Equal Weighted Returns -- Daily\n");
        s.push_str(",Agric,Food,Soda\n");
        s.push_str("20200102,  9.99,  9.99,  9.99\n");
        s
    }

    #[test]
    fn parses_first_block_and_converts_percent() {
        let panel = parse_ff49(&sample_csv()).unwrap();
        assert_eq!(panel.assets(), &["Agric", "Food", "Soda"]);
        // the sentinel row is dropped; the second block is ignored
        assert_eq!(panel.days(), 2);
        assert_eq!(panel.dates()[0], NaiveDate::from_ymd_opt(2020, 1, 2).unwrap());
        assert!((panel.returns()[[0, 0]] - 0.0123).abs() < 1e-15);
        assert!((panel.returns()[[0, 1]] - (-0.0050)).abs() < 1e-15);
        assert!((panel.returns()[[1, 1]] - 0.0030).abs() < 1e-15);
    }

    #[test]
    fn load_from_disk_and_error_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ff49.csv");
        std::fs::File::create(&path)
            .unwrap()
            .write_all(sample_csv().as_bytes())
            .unwrap();
        assert!(load_ff49(&path).is_ok());
        assert!(load_ff49(dir.path().join("absent.csv")).is_err());

        let empty = dir.path().join("empty.csv");
        std::fs::File::create(&empty)
            .unwrap()
            .write_all(b"preamble only\n")
            .unwrap();
        assert!(load_ff49(&empty).is_err());

        let bad_date = dir.path().join("bad.csv");
        std::fs::File::create(&bad_date)
            .unwrap()
            .write_all(b",A,B\n20200099, 1.0, 2.0\n")
            .unwrap();
        assert!(load_ff49(&bad_date).is_err());
    }

    fn synthetic_panel(days: usize, means: &[f64]) -> ReturnsPanel {
        let n = means.len();
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let mut dates = Vec::new();
        let mut d = start;
        while dates.len() < days {
            // weekdays only
            if d.weekday().num_days_from_monday() < 5 {
                dates.push(d);
            }
            d = d.succ_opt().unwrap();
        }
        let mut returns = Array2::zeros((days, n));
        for r in 0..days {
            for c in 0..n {
                // deterministic wiggle that keeps the mean at means[c]
                returns[[r, c]] = means[c] + 1e-6 * ((r % 3) as f64 - 1.0);
            }
        }
        ReturnsPanel::new(dates, (0..n).map(|i| format!("A{i}")).collect(), returns).unwrap()
    }

    #[test]
    fn universe_selection_ranks_by_absolute_mean() {
        let panel = synthetic_panel(30, &[0.02, -0.03, 0.01]);
        let window = (panel.dates()[0], *panel.dates().last().unwrap());
        let full = select_universe(&panel, 3, window).unwrap();
        assert_eq!(full.assets(), panel.assets());
        let top2 = select_universe(&panel, 2, window).unwrap();
        assert_eq!(top2.assets(), &["A1", "A0"]);
        assert!(select_universe(&panel, 4, window).is_err());
    }

    #[test]
    fn universe_selection_ties_break_by_column_order() {
        let panel = synthetic_panel(30, &[0.02, -0.02, 0.01]);
        let window = (panel.dates()[0], *panel.dates().last().unwrap());
        let top1 = select_universe(&panel, 1, window).unwrap();
        assert_eq!(top1.assets(), &["A0"]);
    }

    #[test]
    fn rolling_boundary_counts() {
        // ~252 trading days plus one further month
        let panel = synthetic_panel(252, &[0.001, 0.002]);
        // extend with exactly one more month of trading days
        let last = *panel.dates().last().unwrap();
        assert!(rolling_instances(&panel, 252, 1, 1.0, 0.0).is_err());
        let mut dates = panel.dates().to_vec();
        let mut d = last.succ_opt().unwrap();
        let target_month = {
            // first day of the month after `last`
            let mut m = last;
            loop {
                m = m.succ_opt().unwrap();
                if m.day() == 1 {
                    break m.month();
                }
            }
        };
        let mut extra = 0;
        while dates.len() < 252 + 40 {
            if d.weekday().num_days_from_monday() < 5 {
                if d.month() == target_month {
                    dates.push(d);
                    extra += 1;
                } else if extra > 0 {
                    break;
                }
            }
            d = d.succ_opt().unwrap();
        }
        let total = dates.len();
        let mut returns = Array2::zeros((total, 2));
        for r in 0..total {
            returns[[r, 0]] = 0.001 + 1e-6 * ((r % 3) as f64 - 1.0);
            returns[[r, 1]] = 0.002 + 1e-6 * ((r % 5) as f64 - 2.0);
        }
        let panel = ReturnsPanel::new(
            dates,
            vec!["A0".into(), "A1".into()],
            returns,
        )
        .unwrap();
        let rolled = rolling_instances(&panel, 252, 1, 1.0, 0.0).unwrap();
        assert_eq!(rolled.len(), 1);
        assert_eq!(rolled[0].estimation, 0..252);
        assert_eq!(rolled[0].evaluation, 252..total);
    }

    #[test]
    fn rolling_windows_tile_without_overlap() {
        let panel = synthetic_panel(420, &[0.001, -0.001, 0.002]);
        let rolled = rolling_instances(&panel, 252, 2, 1.0, 4.0).unwrap();
        // independent calendar-walk oracle for the instance count
        let expected = {
            let mut count = 0;
            for t in 1..panel.days() {
                let (a, b) = (panel.dates()[t - 1], panel.dates()[t]);
                if (a.month() != b.month() || a.year() != b.year()) && t >= 252 {
                    count += 1;
                }
            }
            count
        };
        assert_eq!(rolled.len(), expected);
        assert!(!rolled.is_empty());
        for w in rolled.windows(2) {
            assert_eq!(w[0].evaluation.end, w[1].evaluation.start);
        }
        for r in &rolled {
            assert_eq!(r.estimation.end, r.evaluation.start);
            assert!(!r.evaluation.is_empty());
            assert_eq!(r.estimation.len(), 252);
        }
        assert_eq!(rolled.last().unwrap().evaluation.end, panel.days());
    }
}
