//! CSV and JSON exports. Numbers are written with 17 significant digits.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::value::RawValue;

use super::{AggregateCell, AnalyticsError, GroupBy, MetricValues, Scorecard};
use crate::numfmt::sig17;
use crate::Scalar;

fn num<S: Scalar>(x: S) -> String {
    sig17(x.as_f64())
}

pub fn write_aggregates_csv<W: Write, S: Scalar>(
    out: W,
    by: &[GroupBy],
    cells: &[AggregateCell<S>],
) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = by.iter().map(|g| g.column()).collect();
    header.extend(["n", "mean", "ci95"]);
    w.write_record(&header)?;
    for c in cells {
        let mut row = c.key.clone();
        row.extend([c.n.to_string(), num(c.mean), num(c.ci95)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories_csv<W: Write, S: Scalar>(
    out: W,
    series: &BTreeMap<String, Vec<S>>,
) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant", "round", "mean_encoded"])?;
    for (variant, values) in series {
        for (d, v) in values.iter().enumerate() {
            w.write_record([variant.as_str(), &(d + 1).to_string(), &num(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Normalized metrics per model, one row each.
pub fn write_radar_csv<W: Write, S: Scalar>(out: W, card: &Scorecard<S>) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "I_V", "C_I", "S_P", "V_R"])?;
    for (model, score) in &card.models {
        let m = &score.normalized;
        let sp = m.sp.map(num).unwrap_or_default();
        w.write_record([model.as_str(), &num(m.iv), &num(m.ci), &sp, &num(m.vr)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsOut {
    #[serde(rename = "I_V")]
    iv: Box<RawValue>,
    #[serde(rename = "C_I")]
    ci: Box<RawValue>,
    #[serde(rename = "S_P", skip_serializing_if = "Option::is_none")]
    sp: Option<Box<RawValue>>,
    #[serde(rename = "V_R")]
    vr: Box<RawValue>,
}

#[derive(Serialize)]
struct ModelOut {
    raw: MetricsOut,
    normalized: MetricsOut,
}

#[derive(Serialize)]
struct CardOut {
    models: BTreeMap<String, ModelOut>,
}

fn raw_num<S: Scalar>(x: S) -> Box<RawValue> {
    RawValue::from_string(num(x)).expect("finite numbers are valid JSON")
}

fn metrics_out<S: Scalar>(m: &MetricValues<S>) -> MetricsOut {
    MetricsOut {
        iv: raw_num(m.iv),
        ci: raw_num(m.ci),
        sp: m.sp.map(raw_num),
        vr: raw_num(m.vr),
    }
}

pub fn scorecard_json<S: Scalar>(card: &Scorecard<S>) -> String {
    let out = CardOut {
        models: card
            .models
            .iter()
            .map(|(k, v)| {
                (
                    k.clone(),
                    ModelOut {
                        raw: metrics_out(&v.raw),
                        normalized: metrics_out(&v.normalized),
                    },
                )
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("scorecard serializes")
}
