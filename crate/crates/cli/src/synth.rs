//! Seeded synthetic fixtures: an equity returns panel with factor structure
//! and betting matchdays with realistic bookmaker odds. Both can be written
//! out in the native external file layouts so the loaders get exercised
//! end to end without downloads.

use std::io::Write;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use folio_core::betting::MatchResult;
use folio_core::ingest::{MatchRecord, OddsTriplet, ReturnsPanel};

use crate::config::SynthParams;
use crate::error::{CliError, Result};

/// Daily returns panel from a 3-factor model calibrated to daily-return
/// scale: drifts of a few basis points, volatilities near 1% per day, and a
/// positive market loading for every asset so the covariance is dense.
pub fn synth_equity_panel(params: &SynthParams) -> Result<ReturnsPanel> {
    let n = params.equity_assets;
    let days = params.equity_days;
    if n < 1 || days < 2 {
        return Err(CliError::Config(format!(
            "synthetic panel needs assets >= 1 and days >= 2, got {n}/{days}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    const FACTORS: usize = 3;
    let factor_vol = [0.008, 0.004, 0.004];
    let mut loadings = vec![[0.0; FACTORS]; n];
    let mut idio_vol = vec![0.0; n];
    let mut drift = vec![0.0; n];
    for a in 0..n {
        loadings[a][0] = rng.gen_range(0.5..1.5);
        for f in 1..FACTORS {
            loadings[a][f] = 0.4 * unit.sample(&mut rng);
        }
        idio_vol[a] = rng.gen_range(0.004..0.012);
        drift[a] = 3e-4 + 5e-4 * unit.sample(&mut rng);
    }

    let dates = trading_days(NaiveDate::from_ymd_opt(2021, 1, 4).expect("valid date"), days);
    let mut returns = Array2::zeros((days, n));
    for d in 0..days {
        let mut f = [0.0; FACTORS];
        for (i, v) in f.iter_mut().enumerate() {
            *v = factor_vol[i] * unit.sample(&mut rng);
        }
        for a in 0..n {
            let systematic: f64 = (0..FACTORS).map(|i| loadings[a][i] * f[i]).sum();
            returns[[d, a]] = drift[a] + systematic + idio_vol[a] * unit.sample(&mut rng);
        }
    }
    let labels = (0..n).map(|i| format!("Ind{i:02}")).collect();
    ReturnsPanel::new(dates, labels, returns).map_err(Into::into)
}

fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if d.weekday().num_days_from_monday() < 5 {
            out.push(d);
        }
        d = d.succ_opt().expect("date range");
    }
    out
}

/// Write a panel in the French Data Library daily layout: preamble text, a
/// header row of industry names, then YYYYMMDD rows of percent returns.
pub fn write_ff49_csv<P: AsRef<Path>>(panel: &ReturnsPanel, path: P) -> Result<()> {
    let mut f = std::fs::File::create(path.as_ref()).map_err(|source| CliError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    let write = |f: &mut std::fs::File, s: String| -> Result<()> {
        f.write_all(s.as_bytes()).map_err(|source| CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    };
    write(&mut f, "Synthetic daily industry portfolios.\n".into())?;
    write(&mut f, "Missing data are indicated by -99.99.\n\n".into())?;
    write(&mut f, format!(",{}\n", panel.assets().join(",")))?;
    for (r, date) in panel.dates().iter().enumerate() {
        let row: Vec<String> = (0..panel.n_assets())
            .map(|c| format!("{:.4}", panel.returns()[[r, c]] * 100.0))
            .collect();
        write(
            &mut f,
            format!("{},{}\n", date.format("%Y%m%d"), row.join(",")),
        )?;
    }
    Ok(())
}

const LEAGUES: [&str; 5] = ["E0", "SP1", "I1", "D1", "F1"];

/// Simulated matchdays: weekly Saturdays, `betting_matches_per_day` fixtures
/// each, priced by `betting_books` bookmakers around a common overround and
/// settled by sampling the true outcome probabilities.
pub fn synth_match_records(params: &SynthParams) -> Result<Vec<MatchRecord>> {
    if params.betting_matchdays < 1 || params.betting_matches_per_day < 1 {
        return Err(CliError::Config(
            "synthetic betting needs at least one matchday and one match per day".into(),
        ));
    }
    if params.betting_books < 1 {
        return Err(CliError::Config("need at least one bookmaker".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xB0A11);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let book_names: Vec<&str> = ["B365", "PS", "WH", "BW", "IW"]
        .into_iter()
        .take(params.betting_books.min(5))
        .collect();

    let first_saturday = NaiveDate::from_ymd_opt(2023, 8, 5).expect("valid date");
    let mut out = Vec::new();
    let mut team_counter = 0usize;
    for day in 0..params.betting_matchdays {
        let date = first_saturday + chrono::Duration::days(7 * day as i64);
        for m in 0..params.betting_matches_per_day {
            // true outcome probabilities from a strength model
            let s: f64 = 0.35 + 0.6 * unit.sample(&mut rng);
            let ph_raw = s.exp() / (s.exp() + 1.0);
            let pd = 0.18 + 0.12 * (-s.abs()).exp();
            let ph = ph_raw * (1.0 - pd);
            let pa = (1.0 - ph_raw) * (1.0 - pd);
            let p = [ph, pd, pa];
            let overround: f64 = rng.gen_range(1.03..1.07);
            let fair: Vec<f64> = p
                .iter()
                .map(|&pi| (1.0 / (pi * overround)).clamp(1.1, 15.0))
                .collect();
            let triplets = book_names
                .iter()
                .map(|name| {
                    let jitter =
                        |d: f64, rng: &mut ChaCha8Rng| (d * rng.gen_range(0.99..1.01)).max(1.05);
                    OddsTriplet {
                        source: name.to_string(),
                        home: jitter(fair[0], &mut rng),
                        draw: jitter(fair[1], &mut rng),
                        away: jitter(fair[2], &mut rng),
                    }
                })
                .collect();
            let roll: f64 = rng.gen();
            let result = if roll < p[0] {
                MatchResult::Home
            } else if roll < p[0] + p[1] {
                MatchResult::Draw
            } else {
                MatchResult::Away
            };
            out.push(MatchRecord {
                league: LEAGUES[m % LEAGUES.len()].to_string(),
                date,
                time: Some("15:00".into()),
                home: format!("Club{:03}", team_counter),
                away: format!("Club{:03}", team_counter + 1),
                result: Some(result),
                triplets,
            });
            team_counter += 2;
        }
    }
    Ok(out)
}

/// Write match records in the football-data.co.uk per-season layout.
pub fn write_football_csv<P: AsRef<Path>>(records: &[MatchRecord], path: P) -> Result<()> {
    let books: Vec<&str> = {
        let mut seen = Vec::new();
        for r in records {
            for t in &r.triplets {
                if !seen.contains(&t.source.as_str()) {
                    seen.push(t.source.as_str());
                }
            }
        }
        seen
    };
    let mut f = std::fs::File::create(path.as_ref()).map_err(|source| CliError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    let io_err = |source| CliError::Io {
        path: path.as_ref().display().to_string(),
        source,
    };
    let mut header = "Div,Date,Time,HomeTeam,AwayTeam,FTHG,FTAG,FTR".to_string();
    for b in &books {
        header.push_str(&format!(",{b}H,{b}D,{b}A"));
    }
    writeln!(f, "{header}").map_err(io_err)?;
    for r in records {
        let (fthg, ftag, ftr) = match r.result {
            Some(MatchResult::Home) => (2, 1, "H"),
            Some(MatchResult::Draw) => (1, 1, "D"),
            Some(MatchResult::Away) => (0, 1, "A"),
            None => (0, 0, ""),
        };
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            r.league,
            r.date.format("%d/%m/%Y"),
            r.time.as_deref().unwrap_or(""),
            r.home,
            r.away,
            fthg,
            ftag,
            ftr
        );
        for b in &books {
            match r.triplets.iter().find(|t| t.source == *b) {
                Some(t) => line.push_str(&format!(",{:.3},{:.3},{:.3}", t.home, t.draw, t.away)),
                None => line.push_str(",,,"),
            }
        }
        writeln!(f, "{line}").map_err(io_err)?;
    }
    Ok(())
}
