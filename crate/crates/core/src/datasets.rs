//! Bundled example series.
//!
//! * `nottem`: average monthly air temperatures at Nottingham Castle in
//!   degrees Fahrenheit, 1920 to 1939 (240 values, period 12).
//! * `austres`: quarterly Australian resident population in thousands,
//!   1971 Q2 to 1993 Q2 (89 values, period 4).

use crate::csvio::parse_csv;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const NOTTEM_CSV: &str = include_str!("../data/nottem.csv");
pub const AUSTRES_CSV: &str = include_str!("../data/austres.csv");

pub const NAMES: [&str; 2] = ["nottem", "austres"];

pub fn nottem() -> TimeSeries {
    builtin("nottem").expect("bundled dataset parses")
}

pub fn austres() -> TimeSeries {
    builtin("austres").expect("bundled dataset parses")
}

/// Looks up a bundled dataset by name, with its natural period.
pub fn builtin(name: &str) -> Result<TimeSeries> {
    let (text, period) = match name {
        "nottem" => (NOTTEM_CSV, 12),
        "austres" => (AUSTRES_CSV, 4),
        other => {
            return Err(Error::Config(format!(
                "unknown dataset `{other}` (expected one of {})",
                NAMES.join(", ")
            )))
        }
    };
    parse_csv(text.as_bytes(), None, Some(period), name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let n = nottem();
        assert_eq!((n.len(), n.period()), (240, Some(12)));
        assert_eq!(n.values()[0], 40.6);
        let a = austres();
        assert_eq!((a.len(), a.period()), (89, Some(4)));
        assert_eq!(a.values()[0], 13067.3);
        assert_eq!(a.values()[88], 17661.5);
        assert!(builtin("airpass").is_err());
    }
}
