use std::io::{Read, Write};

use super::{DeviationCurve, MetricsError, PhaseSeries};

/// Reads a `time_s,offset_s` CSV into a series. Times must be uniformly
/// spaced (to 1e-6 of the mean step); the step becomes `tau0`. Empty offsets
/// are gaps.
pub fn read_offset_csv<R: Read>(input: R) -> Result<PhaseSeries, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| MetricsError::Csv(format!("missing column {name:?}")))
    };
    let (ti, xi) = (col("time_s")?, col("offset_s")?);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> Result<f64, MetricsError> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>().map_err(|_| MetricsError::Csv(format!("row {}: cannot parse {s:?} as a number", line + 2)))
        };
        times.push(field(ti)?);
        let gap = rec.get(xi).is_some_and(str::is_empty);
        values.push(if gap { 0.0 } else { field(xi)? });
        missing.push(gap);
    }
    if times.len() < 3 {
        return Err(MetricsError::InvalidSeries(format!("need at least 3 rows, got {}", times.len())));
    }
    let tau0 = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(tau0 > 0.0) {
        return Err(MetricsError::InvalidSeries("times must increase".into()));
    }
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - tau0).abs() > 1e-6 * tau0 {
            return Err(MetricsError::InvalidSeries(format!("non-uniform sampling at row {}", k + 3)));
        }
    }
    PhaseSeries::with_gaps(tau0, values, missing)
}

/// Writes `tau_s,value,n_terms` rows.
pub fn write_deviation_csv<W: Write>(curve: &DeviationCurve, out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau_s", "value", "n_terms"]).map_err(csv_err)?;
    for i in 0..curve.taus.len() {
        w.write_record([
            format!("{:e}", curve.taus[i]),
            format!("{:e}", curve.values[i]),
            curve.n_terms[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(())
}

/// Writes a series as `time_s,offset_s`; gaps are written as empty offsets.
pub fn write_offset_csv<W: Write>(series: &PhaseSeries, out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_s", "offset_s"]).map_err(csv_err)?;
    for (i, (&v, &gap)) in series.values().iter().zip(series.missing()).enumerate() {
        let x = if gap { String::new() } else { format!("{v:e}") };
        w.write_record([format!("{:e}", i as f64 * series.tau0()), x]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> MetricsError {
    MetricsError::Csv(e.to_string())
}
