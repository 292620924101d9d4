//! Header (`.hea`) text parsing.
//!
//! A header is line-oriented: a record line, then one line per signal.
//! Comment lines start with `#` and blank lines are skipped. Record line:
//!
//! ```text
//! NAME N_SIGNALS SAMPLING_RATE N_SAMPLES
//! ```
//!
//! Signal line (trailing fields optional, description may contain spaces):
//!
//! ```text
//! FILE FORMAT GAIN(BASELINE)/UNITS ADC_RES ADC_ZERO INIT_VAL CKSUM BLK DESCRIPTION
//! ```

use super::{RecordHeader, SignalSpec, WfdbError};

/// Parses header text into a [`RecordHeader`].
///
/// Errors carry the 1-based line number of the offending line. The record
/// name may include a segment suffix (`NAME/...`) which is stripped; the
/// sampling rate may carry a counter-frequency suffix (`360/...`) which is
/// likewise ignored.
pub fn parse_header(text: &str) -> Result<RecordHeader, WfdbError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, record_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "header contains no record line"))?;
    let fields: Vec<&str> = record_line.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(parse_err(
            line_no,
            format!("record line needs NAME NSIG FS NSAMP, got {} fields", fields.len()),
        ));
    }

    let name = fields[0].split('/').next().unwrap_or("").to_string();
    if name.is_empty() {
        return Err(parse_err(line_no, "empty record name"));
    }
    let n_signal: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad signal count {:?}", fields[1])))?;
    if n_signal == 0 {
        return Err(parse_err(line_no, "record declares zero signals"));
    }
    let rate_field = fields[2].split('/').next().unwrap_or("");
    let sampling_rate: u32 = rate_field
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad sampling rate {:?}", fields[2])))?;
    if sampling_rate == 0 {
        return Err(parse_err(line_no, "sampling rate must be positive"));
    }
    let n_samples: u64 = fields[3]
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad sample count {:?}", fields[3])))?;

    let mut signals = Vec::with_capacity(n_signal);
    let mut last_line = line_no;
    for _ in 0..n_signal {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(
                last_line,
                format!("expected {} signal lines, found {}", n_signal, signals.len()),
            )
        })?;
        signals.push(parse_signal_line(line_no, line)?);
        last_line = line_no;
    }

    Ok(RecordHeader { name, n_signal, sampling_rate, n_samples, signals })
}

fn parse_signal_line(line_no: usize, line: &str) -> Result<SignalSpec, WfdbError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(parse_err(line_no, "signal line needs at least FILE and FORMAT"));
    }

    let mut spec = SignalSpec { file_name: fields[0].to_string(), ..SignalSpec::default() };

    // Format is a leading integer, possibly followed by xN / :skew / +offset
    // modifiers that this database never uses.
    let digits: String = fields[1].chars().take_while(|c| c.is_ascii_digit()).collect();
    spec.format = digits
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad signal format {:?}", fields[1])))?;

    let mut explicit_baseline = None;
    if let Some(gain_field) = fields.get(2) {
        let (gain, baseline) = parse_gain(gain_field)
            .ok_or_else(|| parse_err(line_no, format!("bad gain field {:?}", gain_field)))?;
        if gain != 0.0 {
            spec.gain = gain;
        }
        explicit_baseline = baseline;
    }
    if let Some(res) = fields.get(3) {
        spec.adc_resolution = res
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad ADC resolution {:?}", res)))?;
    }
    if let Some(zero) = fields.get(4) {
        spec.adc_zero = zero
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad ADC zero {:?}", zero)))?;
    }
    // Fields 5..=7 are initial value, checksum, and block size; none of them
    // affect decoding, so they are accepted and ignored.
    spec.baseline = explicit_baseline.unwrap_or(spec.adc_zero);
    if fields.len() > 8 {
        spec.lead_name = fields[8..].join(" ");
    }
    Ok(spec)
}

/// Splits `GAIN(BASELINE)/UNITS` into gain and optional baseline.
fn parse_gain(field: &str) -> Option<(f64, Option<i32>)> {
    let without_units = field.split('/').next()?;
    let (gain_part, baseline) = match without_units.split_once('(') {
        Some((g, rest)) => {
            let inner = rest.strip_suffix(')')?;
            (g, Some(inner.parse::<i32>().ok()?))
        }
        None => (without_units, None),
    };
    let gain: f64 = gain_part.parse().ok()?;
    Some((gain, baseline))
}

fn parse_err(line: usize, msg: impl Into<String>) -> WfdbError {
    WfdbError::Parse { line, msg: msg.into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CHANNEL: &str = "\
100 2 360 650000
100.dat 212 200 11 1024 995 -22131 0 MLII
100.dat 212 200 11 1024 1011 20052 0 V5
# age 69, male
";

    #[test]
    fn parses_a_standard_two_channel_header() {
        let h = parse_header(TWO_CHANNEL).unwrap();
        assert_eq!(h.name, "100");
        assert_eq!(h.n_signal, 2);
        assert_eq!(h.sampling_rate, 360);
        assert_eq!(h.n_samples, 650_000);
        assert_eq!(h.signals.len(), 2);
        assert_eq!(h.signals[0].file_name, "100.dat");
        assert_eq!(h.signals[0].format, 212);
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].adc_resolution, 11);
        assert_eq!(h.signals[0].adc_zero, 1024);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[0].lead_name, "MLII");
        assert_eq!(h.signals[1].lead_name, "V5");
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# leading comment\n\n100 1 360 1000\n\n# mid comment\n100.dat 212 200 11 1024 0 0 0 MLII\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.n_signal, 1);
        assert_eq!(h.signals[0].lead_name, "MLII");
    }

    #[test]
    fn gain_with_baseline_and_units_is_split() {
        let text = "x 1 250 100\nx.dat 212 1000(512)/mV 12 0 0 0 0 ECG\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.signals[0].gain, 1000.0);
        assert_eq!(h.signals[0].baseline, 512);
        assert_eq!(h.signals[0].adc_zero, 0);
    }

    #[test]
    fn missing_gain_and_zero_fall_back_to_defaults() {
        let text = "x 1 360 100\nx.dat 212\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].adc_zero, 1024);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[0].lead_name, "");
    }

    #[test]
    fn zero_gain_means_unspecified() {
        let text = "x 1 360 100\nx.dat 212 0 12 0\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].baseline, 0);
    }

    #[test]
    fn non_numeric_rate_is_a_parse_error_with_line_number() {
        let err = parse_header("100 2 xyz 650000\n").unwrap_err();
        match err {
            WfdbError::Parse { line, msg } => {
                assert_eq!(line, 1);
                assert!(msg.contains("sampling rate"), "{msg}");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn missing_signal_lines_are_reported() {
        let err = parse_header("100 2 360 650000\n100.dat 212 200 11 1024 0 0 0 MLII\n").unwrap_err();
        assert!(matches!(err, WfdbError::Parse { .. }), "{err:?}");
    }

    #[test]
    fn counter_frequency_suffix_is_ignored() {
        let h = parse_header("x 1 360/4096 100\nx.dat 212\n").unwrap();
        assert_eq!(h.sampling_rate, 360);
    }
}
