//! Characterization dataset files.
//!
//! ```text
//! # kind=adder:4 provenance=proxy seed=1 inputs=exhaustive cycles=2048 weights=1:0.1:1 all_zeros=included
//! config_bits,config_uint,avg_abs_err,avg_abs_rel_err,max_abs_err,err_rate,lut_util,cpd_proxy,power_proxy,pdp,pdplut
//! ```

use std::path::Path;

use super::{ActivityPolicy, BehavMetrics, CharDataset, CharRecord, InputPolicy, PpaMetrics, Provenance, ProxyWeights};
use crate::error::{Error, Result};
use crate::operator::{AxoConfig, OperatorKind};
use crate::table::{self, fmt_real, parse_real, parse_uint, Table};

pub const CSV_HEADER: [&str; 11] = [
    "config_bits",
    "config_uint",
    "avg_abs_err",
    "avg_abs_rel_err",
    "max_abs_err",
    "err_rate",
    "lut_util",
    "cpd_proxy",
    "power_proxy",
    "pdp",
    "pdplut",
];

pub(crate) fn kind_token(kind: OperatorKind) -> String {
    format!("{}:{}", kind.family_token(), kind.width())
}

pub(crate) fn record_fields(r: &CharRecord) -> Vec<String> {
    vec![
        r.config.to_bitstring(),
        r.config_uint().to_string(),
        fmt_real(r.behav.avg_abs_err),
        fmt_real(r.behav.avg_abs_rel_err),
        fmt_real(r.behav.max_abs_err),
        fmt_real(r.behav.err_rate),
        r.ppa.lut_util.to_string(),
        fmt_real(r.ppa.cpd_proxy),
        fmt_real(r.ppa.power_proxy),
        fmt_real(r.ppa.pdp),
        fmt_real(r.ppa.pdplut),
    ]
}

/// Parses a config from its bitstring/UINT columns and checks they agree.
pub(crate) fn parse_config(bits: &str, uint: &str, len: usize, line: usize) -> Result<AxoConfig> {
    let config = AxoConfig::parse_bitstring(bits).map_err(|e| Error::parse(line, e.to_string()))?;
    if config.len() != len {
        return Err(Error::parse(line, format!("bitstring '{bits}' has {} bits, expected {len}", config.len())));
    }
    let u = parse_uint(uint, line, "config_uint")?;
    if u != config.to_uint() {
        return Err(Error::parse(line, format!("config_uint {u} does not match bitstring '{bits}'")));
    }
    Ok(config)
}

/// Parses metric columns starting at `offset` (same order as [`CSV_HEADER`][2..]).
pub(crate) fn parse_metrics(fields: &[String], offset: usize, line: usize) -> Result<(BehavMetrics, PpaMetrics)> {
    let real = |i: usize| parse_real(&fields[offset + i], line, CSV_HEADER[2 + i]);
    let behav =
        BehavMetrics { avg_abs_err: real(0)?, avg_abs_rel_err: real(1)?, max_abs_err: real(2)?, err_rate: real(3)? };
    let lut_util = parse_uint(&fields[offset + 4], line, "lut_util")? as u32;
    let ppa = PpaMetrics { lut_util, cpd_proxy: real(5)?, power_proxy: real(6)?, pdp: real(7)?, pdplut: real(8)? };
    Ok((behav, ppa))
}

pub(crate) fn parse_kind_token(token: &str) -> Result<OperatorKind> {
    let kind: OperatorKind = token.parse().map_err(|_| Error::Schema(format!("unknown operator kind '{token}'")))?;
    Ok(kind)
}

pub fn render_csv(dataset: &CharDataset) -> String {
    let mut preamble = vec![
        ("kind", kind_token(dataset.kind)),
        ("provenance", dataset.provenance.token().to_string()),
        ("seed", dataset.seed.to_string()),
        ("inputs", dataset.input_policy.to_string()),
    ];
    if let Some(a) = dataset.activity {
        preamble.push(("cycles", a.cycles.to_string()));
    }
    if let Some(w) = dataset.weights {
        preamble.push(("weights", format!("{}:{}:{}", w.lut_delay, w.carry_delay, w.unit_energy)));
    }
    let zeros = if dataset.contains_all_zeros() { "included" } else { "excluded" };
    preamble.push(("all_zeros", zeros.to_string()));
    let rows: Vec<Vec<String>> = dataset.records.iter().map(record_fields).collect();
    table::render_table(&preamble, &CSV_HEADER, &rows)
}

pub fn export_csv(dataset: &CharDataset, path: &Path) -> Result<()> {
    table::write_text(path, &render_csv(dataset))
}

pub fn parse_csv(text: &str) -> Result<CharDataset> {
    from_table(table::parse_table(text)?)
}

pub fn import_csv(path: &Path) -> Result<CharDataset> {
    from_table(table::read_table(path)?)
}

fn from_table(t: Table) -> Result<CharDataset> {
    if t.header != CSV_HEADER {
        return Err(Error::Schema(format!(
            "expected header '{}', found '{}'",
            CSV_HEADER.join(","),
            t.header.join(",")
        )));
    }
    let kind = parse_kind_token(t.preamble_value("kind")?)?;
    let provenance = match t.preamble_value("provenance")? {
        "proxy" => Provenance::ProxyModel,
        "external" => Provenance::ImportedExternal,
        other => return Err(Error::Schema(format!("unknown provenance '{other}'"))),
    };
    let seed = match t.preamble.get("seed") {
        Some(s) => s.parse().map_err(|_| Error::Schema(format!("bad seed '{s}'")))?,
        None => 0,
    };
    let input_policy = match t.preamble.get("inputs") {
        Some(s) => s.parse()?,
        None if provenance == Provenance::ImportedExternal => InputPolicy::External,
        None => return Err(Error::Schema("preamble is missing 'inputs='".into())),
    };
    let activity = match t.preamble.get("cycles") {
        Some(c) => {
            Some(ActivityPolicy { cycles: c.parse().map_err(|_| Error::Schema(format!("bad cycles '{c}'")))?, seed })
        }
        None => None,
    };
    let weights = t.preamble.get("weights").map(|w| parse_weights(w)).transpose()?;
    let len = kind.config_length();
    let mut records = Vec::with_capacity(t.rows.len());
    for (line, fields) in &t.rows {
        let config = parse_config(&fields[0], &fields[1], len, *line)?;
        let (behav, ppa) = parse_metrics(fields, 2, *line)?;
        records.push(CharRecord { config, behav, ppa });
    }
    let dataset = CharDataset { kind, records, provenance, input_policy, activity, weights, seed };
    dataset.check_unique()?;
    Ok(dataset)
}

fn parse_weights(token: &str) -> Result<ProxyWeights> {
    let bad = || Error::Schema(format!("bad weights '{token}'"));
    let v: Vec<f64> = token.split(':').map(str::parse).collect::<Result<_, _>>().map_err(|_| bad())?;
    match v[..] {
        [lut_delay, carry_delay, unit_energy] => Ok(ProxyWeights { lut_delay, carry_delay, unit_energy }),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::Characterizer;
    use crate::operator::enumerate_configs;

    fn adder4() -> CharDataset {
        let kind = OperatorKind::adder(4).unwrap();
        Characterizer::with_defaults(kind, 5).unwrap().dataset(&enumerate_configs(kind, true).unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let ds = adder4();
        let back = parse_csv(&render_csv(&ds)).unwrap();
        assert_eq!(back, ds);
        assert_eq!(render_csv(&back), render_csv(&ds));
    }

    #[test]
    fn external_import() {
        let text = "# kind=mul:4 provenance=external\n".to_string()
            + &CSV_HEADER.join(",")
            + "\n1111111111,1023,0,0,0,0,10,3.5,12.25,42.875,428.75\n";
        let ds = parse_csv(&text).unwrap();
        assert_eq!(ds.provenance, Provenance::ImportedExternal);
        assert_eq!(ds.input_policy, InputPolicy::External);
        assert_eq!(ds.records[0].ppa.lut_util, 10);
    }

    #[test]
    fn malformed_bitstring_names_row() {
        let text = "# kind=adder:4 provenance=external\n".to_string()
            + &CSV_HEADER.join(",")
            + "\n10x1,11,0,0,0,0,3,1,1,1,3\n";
        match parse_csv(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("10x1"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_csv("# kind=adder:4 provenance=proxy inputs=exhaustive\na,b\n"), Err(Error::Schema(_))));
        let head = "# kind=adder:4 provenance=external\n".to_string() + &CSV_HEADER.join(",") + "\n";
        let dup = head.clone() + "0011,3,0,0,0,0,2,1,1,1,2\n0011,3,0,0,0,0,2,1,1,1,2\n";
        assert!(matches!(parse_csv(&dup), Err(Error::DuplicateConfig(_))));
        let short = head.clone() + "011,3,0,0,0,0,2,1,1,1,2\n";
        assert!(matches!(parse_csv(&short), Err(Error::Parse { .. })));
        let mismatch = head + "0011,4,0,0,0,0,2,1,1,1,2\n";
        assert!(matches!(parse_csv(&mismatch), Err(Error::Parse { .. })));
    }
}
