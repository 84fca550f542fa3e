//! Line-oriented `key=value` experiment configuration.
//!
//! A config file holds `key=value` tokens separated by whitespace or
//! newlines; `#` starts a comment. The canonical text is the sorted tokens
//! joined by single spaces, which parses back to the same config.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ellipsephic::{Budget, DigitSet, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got {token:?}")))?;
                if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(Error::Parse(format!("bad key {key:?}")));
                }
                if value.is_empty() {
                    return Err(Error::Parse(format!("empty value for {key}")));
                }
                if entries.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(Error::Parse(format!("duplicate key {key}")));
                }
            }
        }
        Ok(ExperimentConfig { entries })
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

fn invalid(key: &str, value: &str, what: &str) -> Error {
    Error::InvalidParameter(format!("{key}={value}: {what}"))
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing key {key}")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.required(key)?;
        v.parse().map_err(|_| invalid(key, v, "not a valid value"))
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            Some(_) => self.parse(key),
            None => Ok(default),
        }
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|_| self.parse(key)).transpose()
    }

    pub fn digit_set(&self) -> Result<DigitSet> {
        self.required("digit_set")?.parse()
    }

    /// `on`/`off` flags, default off.
    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None | Some("off") => Ok(false),
            Some("on") => Ok(true),
            Some(v) => Err(invalid(key, v, "expected on or off")),
        }
    }

    /// One of `choices`, the first being the default.
    pub fn choice<'a>(&self, key: &str, choices: &[&'a str]) -> Result<&'a str> {
        match self.raw(key) {
            None => Ok(choices[0]),
            Some(v) => choices
                .iter()
                .find(|c| **c == v)
                .copied()
                .ok_or_else(|| invalid(key, v, &format!("expected one of {}", choices.join("|")))),
        }
    }

    /// A comma-separated list of integers, ranges `a..b` and powers `p^e`
    /// or `p^e..p^f`.
    pub fn list(&self, key: &str) -> Result<Vec<u64>> {
        let v = self.required(key)?;
        parse_list(v).ok_or_else(|| invalid(key, v, "expected a list like 9,27 or 1..4 or 5^3..5^6"))
    }

    pub fn budget(&self) -> Result<Budget> {
        let default = Budget::default();
        Ok(Budget {
            tuples: self.parse_or("budget_tuples", default.tuples)?,
            memory_bytes: self.parse_or("budget_memory", default.memory_bytes)?,
        })
    }
}

fn parse_item(item: &str) -> Option<Vec<u64>> {
    let power = |t: &str| -> Option<(u64, u32)> {
        match t.split_once('^') {
            Some((b, e)) => Some((b.parse().ok()?, e.parse().ok()?)),
            None => Some((t.parse().ok()?, 1)),
        }
    };
    match item.split_once("..") {
        None => {
            let (b, e) = power(item)?;
            Some(vec![b.checked_pow(e)?])
        }
        Some((lo, hi)) if lo.contains('^') && hi.contains('^') => {
            let (b1, e1) = power(lo)?;
            let (b2, e2) = power(hi)?;
            if b1 != b2 || e1 > e2 {
                return None;
            }
            (e1..=e2).map(|e| b1.checked_pow(e)).collect()
        }
        Some((lo, hi)) => {
            let (lo, hi): (u64, u64) = (lo.parse().ok()?, hi.parse().ok()?);
            (lo <= hi && hi - lo < 1_000_000).then(|| (lo..=hi).collect())
        }
    }
}

fn parse_list(text: &str) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        out.extend(parse_item(item)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let text = "# count run\ns=2\nk=1  X=9\ndigit_set=p=3;digits=0,1 # binary\nmethod=brute\n";
        let c: ExperimentConfig = text.parse().unwrap();
        let canon = c.to_string();
        assert_eq!(canon, "X=9 digit_set=p=3;digits=0,1 k=1 method=brute s=2");
        assert_eq!(canon.parse::<ExperimentConfig>().unwrap(), c);
    }

    #[test]
    fn rejects_malformed() {
        assert!("s".parse::<ExperimentConfig>().is_err());
        assert!("s=1 s=2".parse::<ExperimentConfig>().is_err());
        assert!("s=".parse::<ExperimentConfig>().is_err());
        assert!("a-b=1".parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("9,27").unwrap(), vec![9, 27]);
        assert_eq!(parse_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_list("5^3..5^5,7").unwrap(), vec![125, 625, 3125, 7]);
        assert_eq!(parse_list("3^2").unwrap(), vec![9]);
        assert!(parse_list("5^3..4^5").is_none());
        assert!(parse_list("4..1").is_none());
        assert!(parse_list("x").is_none());
    }

    #[test]
    fn typed_access() {
        let c: ExperimentConfig = "s=2 method=mitm timing=on".parse().unwrap();
        assert_eq!(c.parse::<usize>("s").unwrap(), 2);
        assert!(c.parse::<usize>("k").is_err());
        assert_eq!(c.parse_or("k", 3usize).unwrap(), 3);
        assert_eq!(c.choice("method", &["brute", "mitm"]).unwrap(), "mitm");
        assert!(c.choice("method", &["brute"]).is_err());
        assert!(c.flag("timing").unwrap());
        assert!(c.check_keys(&["s", "method"]).is_err());
    }
}
