//! Price/return ingestion and sample splitting.
//!
//! CSV files are UTF-8, comma-separated, `.` decimal, no thousands
//! separators, with a mandatory header (`date,close` or `date,return`).
//! Dates are opaque identifiers; ordering is checked numerically when both
//! sides parse as integers (simulator output uses plain indices) and
//! lexicographically otherwise, so ISO-8601 dates work as-is.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Daily closing prices with their date labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    dates: Vec<String>,
    closes: Vec<T>,
}

/// Percentage log returns, optionally date-labelled.
///
/// When derived from a `PriceSeries` the return at index `i` carries the
/// date of the later price. Simulated series may have no dates at all.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries<T> {
    pub dates: Option<Vec<String>>,
    pub values: Vec<T>,
}

/// An in-sample / out-of-sample partition of a return series.
#[derive(Debug, Clone)]
pub struct WindowSplit<T> {
    pub in_sample: ReturnSeries<T>,
    pub out_sample: ReturnSeries<T>,
    pub window_size: usize,
}

fn date_in_order(prev: &str, next: &str) -> bool {
    match (prev.parse::<u64>(), next.parse::<u64>()) {
        (Ok(a), Ok(b)) => a < b,
        _ => prev < next,
    }
}

impl<T: Scalar> PriceSeries<T> {
    /// Validates the type invariants: positive closes, strictly increasing
    /// dates, and at least two observations.
    pub fn new(dates: Vec<String>, closes: Vec<T>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: closes.len(),
            });
        }
        if closes.len() < 2 {
            return Err(Error::domain("need at least 2 prices to form a return"));
        }
        for (i, c) in closes.iter().enumerate() {
            if !c.is_finite() || *c <= T::zero() {
                return Err(Error::domain(format!(
                    "close at row {} is not strictly positive: {}",
                    i + 1,
                    c
                )));
            }
        }
        for i in 1..dates.len() {
            if !date_in_order(&dates[i - 1], &dates[i]) {
                return Err(Error::domain(format!(
                    "dates not strictly increasing at row {} ({:?} then {:?})",
                    i + 1,
                    dates[i - 1],
                    dates[i]
                )));
            }
        }
        Ok(Self { dates, closes })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn closes(&self) -> &[T] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

impl<T: Scalar> ReturnSeries<T> {
    /// A return series with all values checked finite and dates, when
    /// present, aligned and strictly increasing.
    pub fn new(dates: Option<Vec<String>>, values: Vec<T>) -> Result<Self> {
        if let Some(d) = &dates {
            if d.len() != values.len() {
                return Err(Error::LengthMismatch {
                    left: d.len(),
                    right: values.len(),
                });
            }
            for i in 1..d.len() {
                if !date_in_order(&d[i - 1], &d[i]) {
                    return Err(Error::domain(format!(
                        "dates not strictly increasing at row {}",
                        i + 1
                    )));
                }
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite return at row {}", i + 1)));
            }
        }
        Ok(Self { dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Date label for index `i`: the recorded date, or the 1-based index for
    /// undated (simulated) series.
    pub fn date_label(&self, i: usize) -> String {
        match &self.dates {
            Some(d) => d[i].clone(),
            None => (i + 1).to_string(),
        }
    }
}

/// Percentage log returns: `(ln P_{t+1} − ln P_t) × 100`.
pub fn to_log_returns<T: Scalar>(prices: &PriceSeries<T>) -> Result<ReturnSeries<T>> {
    if prices.len() < 2 {
        return Err(Error::domain("need at least 2 prices to form a return"));
    }
    let hundred = T::cast(100.0);
    let values: Vec<T> = prices
        .closes
        .windows(2)
        .map(|w| (w[1].ln() - w[0].ln()) * hundred)
        .collect();
    let dates = Some(prices.dates[1..].to_vec());
    ReturnSeries::new(dates, values)
}

/// First `n_in` observations in-sample, the rest out-of-sample.
pub fn split<T: Scalar>(r: &ReturnSeries<T>, n_in: usize) -> Result<WindowSplit<T>> {
    if n_in == 0 || n_in >= r.len() {
        return Err(Error::domain(format!(
            "in-sample size {} out of range for series of length {}",
            n_in,
            r.len()
        )));
    }
    let slice_dates = |range: std::ops::Range<usize>| {
        r.dates.as_ref().map(|d| d[range].to_vec())
    };
    Ok(WindowSplit {
        in_sample: ReturnSeries {
            dates: slice_dates(0..n_in),
            values: r.values[..n_in].to_vec(),
        },
        out_sample: ReturnSeries {
            dates: slice_dates(n_in..r.len()),
            values: r.values[n_in..].to_vec(),
        },
        window_size: n_in,
    })
}

fn read_two_column_csv(
    text: &str,
    path: Option<&Path>,
    header: [&str; 2],
) -> Result<(Vec<String>, Vec<String>)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::csv(path, 1, "empty file"))?;
    let cols: Vec<&str> = first.trim_end_matches('\r').split(',').collect();
    if cols.len() < 2
        || !cols[0].trim().eq_ignore_ascii_case(header[0])
        || !cols[1].trim().eq_ignore_ascii_case(header[1])
    {
        return Err(Error::csv(
            path,
            1,
            format!("expected header `{},{}`, found `{}`", header[0], header[1], first),
        ));
    }
    let mut keys = Vec::new();
    let mut vals = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let key = fields.next().unwrap_or("").trim();
        let val = match fields.next() {
            Some(v) => v.trim(),
            None => {
                return Err(Error::csv(path, idx + 1, "expected 2 comma-separated fields"));
            }
        };
        keys.push(key.to_string());
        vals.push(val.to_string());
    }
    if keys.is_empty() {
        return Err(Error::csv(path, 1, "no observations"));
    }
    Ok((keys, vals))
}

fn parse_value<T: Scalar>(raw: &str, path: Option<&Path>, line: usize, what: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| Error::csv(path, line, format!("non-numeric {what}: `{raw}`")))
}

/// Parse a `date,close` CSV into a `PriceSeries`.
///
/// Every malformed row is reported with its 1-based line number (the header
/// is line 1).
pub fn load_price_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<PriceSeries<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_price_csv(&text, Some(path))
}

pub fn parse_price_csv<T: Scalar>(text: &str, path: Option<&Path>) -> Result<PriceSeries<T>> {
    let (dates, raw) = read_two_column_csv(text, path, ["date", "close"])?;
    let mut closes = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let line = i + 2;
        let c: T = parse_value(r, path, line, "close")?;
        if !c.is_finite() || c <= T::zero() {
            return Err(Error::csv(path, line, format!("non-positive close: {r}")));
        }
        closes.push(c);
    }
    for i in 1..dates.len() {
        if !date_in_order(&dates[i - 1], &dates[i]) {
            return Err(Error::csv(
                path,
                i + 2,
                format!("dates not increasing: {:?} then {:?}", dates[i - 1], dates[i]),
            ));
        }
    }
    if closes.len() < 2 {
        return Err(Error::csv(path, 2, "need at least 2 prices to form a return"));
    }
    Ok(PriceSeries { dates, closes })
}

/// Parse a `date,return` CSV (returns already in percent). Extra columns
/// after the first two (e.g. the simulator's `logvol`) are ignored.
pub fn load_return_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<ReturnSeries<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_return_csv(&text, Some(path))
}

pub fn parse_return_csv<T: Scalar>(text: &str, path: Option<&Path>) -> Result<ReturnSeries<T>> {
    let (dates, raw) = read_two_column_csv(text, path, ["date", "return"])?;
    let mut values = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let line = i + 2;
        let v: T = parse_value(r, path, line, "return")?;
        if !v.is_finite() {
            return Err(Error::csv(path, line, format!("non-finite return: {r}")));
        }
        values.push(v);
    }
    for i in 1..dates.len() {
        if !date_in_order(&dates[i - 1], &dates[i]) {
            return Err(Error::csv(
                path,
                i + 2,
                format!("dates not increasing: {:?} then {:?}", dates[i - 1], dates[i]),
            ));
        }
    }
    ReturnSeries::new(Some(dates), values)
}
