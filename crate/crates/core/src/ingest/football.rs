//! football-data.co.uk per-season CSV parsing, de-vigging, and slate
//! construction.

use std::path::Path;

use chrono::NaiveDate;

use crate::betting::{BettingSlate, MatchResult, SlateMatch, SlateOutcome};
use crate::error::{Error, Result};

/// One bookmaker's (or average column's) 1X2 price triple for a match.
#[derive(Debug, Clone)]
pub struct OddsTriplet {
    pub source: String,
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

/// One fixture with its final result and every recognized odds triple.
#[derive(Debug, Clone)]
pub struct MatchRecord {
    pub league: String,
    pub date: NaiveDate,
    pub time: Option<String>,
    pub home: String,
    pub away: String,
    pub result: Option<MatchResult>,
    pub triplets: Vec<OddsTriplet>,
}

/// Column prefixes scanned for H/D/A triples, in a fixed order. Bookmaker
/// codes plus the pre-computed consensus columns; market-maximum and closing
/// variants are deliberately not consensus inputs.
const TRIPLET_PREFIXES: [&str; 15] = [
    "B365", "BS", "BW", "GB", "IW", "LB", "PS", "SB", "SJ", "SO", "SY", "VC", "WH", "Avg", "BbAv",
];

fn parse_date(s: &str) -> Result<NaiveDate> {
    // both two- and four-digit years occur in the corpus; %Y would happily
    // read "21" as the year 21 AD, so pick the format by field width
    let fmt = match s.rsplit('/').next().map(str::len) {
        Some(len) if len <= 2 => "%d/%m/%y",
        _ => "%d/%m/%Y",
    };
    NaiveDate::parse_from_str(s, fmt)
        .map_err(|e| Error::InvalidData(format!("unparseable date '{s}': {e}")))
}

/// Parse one per-season CSV: one record per match with the final result and
/// all available odds triples. Errors when the header exposes no recognized
/// odds columns.
pub fn load_football_odds<P: AsRef<Path>>(path: P) -> Result<Vec<MatchRecord>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|source| Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidData(format!("bad CSV header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);

    let date_col = col("Date")
        .ok_or_else(|| Error::InvalidData("no Date column".into()))?;
    let home_col = col("HomeTeam")
        .ok_or_else(|| Error::InvalidData("no HomeTeam column".into()))?;
    let away_col = col("AwayTeam")
        .ok_or_else(|| Error::InvalidData("no AwayTeam column".into()))?;
    let ftr_col = col("FTR");
    let div_col = col("Div");
    let time_col = col("Time");

    let triplet_cols: Vec<(String, usize, usize, usize)> = TRIPLET_PREFIXES
        .iter()
        .filter_map(|p| {
            match (
                col(&format!("{p}H")),
                col(&format!("{p}D")),
                col(&format!("{p}A")),
            ) {
                (Some(h), Some(d), Some(a)) => Some((p.to_string(), h, d, a)),
                _ => None,
            }
        })
        .collect();
    if triplet_cols.is_empty() {
        return Err(Error::InvalidData(
            "no recognized odds columns in the header".into(),
        ));
    }

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::InvalidData(format!("bad CSV row: {e}")))?;
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        if field(home_col).is_empty() || field(date_col).is_empty() {
            continue; // trailing blank rows
        }
        let date = parse_date(field(date_col))?;
        let triplets = triplet_cols
            .iter()
            .filter_map(|(src, h, d, a)| {
                let parse = |i: usize| field(i).parse::<f64>().ok();
                match (parse(*h), parse(*d), parse(*a)) {
                    (Some(home), Some(draw), Some(away))
                        if home > 1.0 && draw > 1.0 && away > 1.0 =>
                    {
                        Some(OddsTriplet {
                            source: src.clone(),
                            home,
                            draw,
                            away,
                        })
                    }
                    _ => None,
                }
            })
            .collect();
        out.push(MatchRecord {
            league: div_col.map(|i| field(i).to_string()).unwrap_or_default(),
            date,
            time: time_col.map(|i| field(i).to_string()).filter(|t| !t.is_empty()),
            home: field(home_col).to_string(),
            away: field(away_col).to_string(),
            result: ftr_col.and_then(|i| MatchResult::from_code(field(i))),
            triplets,
        });
    }
    Ok(out)
}

/// De-vig one match: implied probabilities 1/d are averaged across the
/// available triples and proportionally normalized to sum to 1; the payoff
/// odds are the arithmetic mean of the available decimal odds per outcome.
pub fn devig(triplets: &[OddsTriplet]) -> Result<([f64; 3], [f64; 3])> {
    if triplets.is_empty() {
        return Err(Error::InvalidData("no complete odds triplet".into()));
    }
    for t in triplets {
        if !(t.home > 1.0 && t.draw > 1.0 && t.away > 1.0) {
            return Err(Error::InvalidData(format!(
                "triplet {} has odds not > 1",
                t.source
            )));
        }
    }
    let n = triplets.len() as f64;
    let mut d = [0.0; 3];
    let mut implied = [0.0; 3];
    for t in triplets {
        for (i, o) in [t.home, t.draw, t.away].into_iter().enumerate() {
            d[i] += o / n;
            implied[i] += 1.0 / o / n;
        }
    }
    let total: f64 = implied.iter().sum();
    let p = [implied[0] / total, implied[1] / total, implied[2] / total];
    Ok((d, p))
}

/// Group date-sorted matches into disjoint calendar windows of
/// `window_days` days and emit, per window and per requested size, one slate
/// of the first `size` matches. Within an over-full window matches are taken
/// in (date, kickoff time, league, home team) order. Matches without a
/// complete triplet are skipped.
pub fn build_slates(
    matches: &[MatchRecord],
    window_days: u32,
    slate_sizes: &[usize],
) -> Result<Vec<BettingSlate>> {
    for &s in slate_sizes {
        if s < 1 {
            return Err(Error::InvalidArgument("slate size must be >= 1".into()));
        }
    }
    let mut pool: Vec<&MatchRecord> = matches.iter().filter(|m| !m.triplets.is_empty()).collect();
    pool.sort_by(|a, b| {
        (a.date, &a.time, &a.league, &a.home).cmp(&(b.date, &b.time, &b.league, &b.home))
    });

    let mut slates = Vec::new();
    let mut at = 0;
    while at < pool.len() {
        let window_start = pool[at].date;
        let mut end = at;
        while end < pool.len()
            && (pool[end].date - window_start).num_days() < window_days as i64
        {
            end += 1;
        }
        let group = &pool[at..end];
        for &size in slate_sizes {
            if group.len() < size {
                continue;
            }
            let mut slate_matches = Vec::with_capacity(size);
            for rec in &group[..size] {
                let (d, p) = devig(&rec.triplets)?;
                slate_matches.push(SlateMatch {
                    date: rec.date,
                    home: rec.home.clone(),
                    away: rec.away.clone(),
                    outcomes: [
                        SlateOutcome { odds: d[0], prob: p[0] },
                        SlateOutcome { odds: d[1], prob: p[1] },
                        SlateOutcome { odds: d[2], prob: p[2] },
                    ],
                    result: rec.result,
                });
            }
            slates.push(BettingSlate::new(slate_matches)?);
        }
        at = end;
    }
    Ok(slates)
}
