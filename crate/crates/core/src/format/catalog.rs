use std::collections::BTreeMap;

use thiserror::Error;

use super::{parse_catalog_dsl, FormatSpec, ParseError};

const BUILTIN_DSL: &str = include_str!("../../data/catalog.dsl");
const BUILTIN_HOTWORDS: &str = include_str!("../../data/hotwords.txt");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("format dsl: {0}")]
    Dsl(#[from] ParseError),
    #[error("hot-word file line {line}: {message}")]
    Hotwords { line: usize, message: String },
    #[error("unknown category {id:?}; known: {known}")]
    UnknownCategory { id: String, known: String },
}

/// Parses `category_id: word[, word]*` lines. Words are lowercased.
pub fn parse_hotwords(text: &str) -> Result<BTreeMap<String, Vec<String>>, CatalogError> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (id, words) = t
            .split_once(':')
            .ok_or_else(|| CatalogError::Hotwords { line: i + 1, message: "expected 'category_id: words'".into() })?;
        let id = id.trim();
        if id.is_empty() {
            return Err(CatalogError::Hotwords { line: i + 1, message: "empty category id".into() });
        }
        let entry = out.entry(id.to_string()).or_default();
        for w in words.split(',') {
            let w = w.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if !w.is_empty() && !entry.contains(&w) {
                entry.push(w);
            }
        }
    }
    Ok(out)
}

/// An ordered set of format specs plus per-category hot-words.
#[derive(Debug, Clone)]
pub struct Catalog {
    specs: Vec<FormatSpec>,
    hotwords: BTreeMap<String, Vec<String>>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_sources(BUILTIN_DSL, BUILTIN_HOTWORDS).expect("built-in catalog parses")
    }

    pub fn from_sources(dsl: &str, hotwords: &str) -> Result<Self, CatalogError> {
        Self::new(parse_catalog_dsl(dsl)?, parse_hotwords(hotwords)?)
    }

    pub fn new(specs: Vec<FormatSpec>, hotwords: BTreeMap<String, Vec<String>>) -> Result<Self, CatalogError> {
        let catalog = Catalog { specs, hotwords: BTreeMap::new() };
        for id in hotwords.keys() {
            catalog.require(id)?;
        }
        Ok(Catalog { hotwords, ..catalog })
    }

    pub fn specs(&self) -> &[FormatSpec] {
        &self.specs
    }

    pub fn get(&self, id: &str) -> Option<&FormatSpec> {
        self.specs.iter().find(|s| s.category_id == id)
    }

    pub fn require(&self, id: &str) -> Result<&FormatSpec, CatalogError> {
        self.get(id).ok_or_else(|| CatalogError::UnknownCategory { id: id.to_string(), known: self.ids().join(", ") })
    }

    pub fn ids(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.category_id.as_str()).collect()
    }

    pub fn hotwords(&self, id: &str) -> &[String] {
        self.hotwords.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Restricts the catalog to `ids`, keeping catalog order.
    pub fn subset(&self, ids: &[String]) -> Result<Catalog, CatalogError> {
        for id in ids {
            self.require(id)?;
        }
        let specs = self.specs.iter().filter(|s| ids.contains(&s.category_id)).cloned().collect();
        let hotwords = self.hotwords.iter().filter(|(k, _)| ids.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        Ok(Catalog { specs, hotwords })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{render_format_spec, Checksum};
    use std::collections::HashSet;

    #[test]
    fn builtin_catalog_shape() {
        let c = Catalog::builtin();
        assert!(c.len() >= 20);
        assert!(c.specs().iter().filter(|s| s.numeric_only).count() >= 12);
        let ids: HashSet<_> = c.ids().into_iter().collect();
        assert_eq!(ids.len(), c.len());
        assert!(c.specs().iter().any(|s| s.checksum == Checksum::Luhn));
        assert!(c.specs().iter().any(|s| s.checksum == Checksum::Mod97));
        assert!(c.specs().iter().any(|s| matches!(s.checksum, Checksum::WeightedSum { .. })));
    }

    #[test]
    fn builtin_specs_round_trip_and_generate() {
        for spec in Catalog::builtin().specs() {
            assert_eq!(&crate::format::parse_format_spec(&render_format_spec(spec)).unwrap(), spec);
            for seed in 0..50 {
                let v = spec.generate(seed);
                assert!(spec.validate(&v.raw), "{} {}", spec.category_id, v.raw);
                if spec.numeric_only {
                    assert!(v.stripped.chars().all(|c| c.is_ascii_digit()));
                    assert_eq!(v.stripped.len(), spec.stripped_len());
                }
            }
        }
    }

    #[test]
    fn every_category_has_hotwords() {
        let c = Catalog::builtin();
        for id in c.ids() {
            assert!(!c.hotwords(id).is_empty(), "{id}");
        }
    }

    #[test]
    fn hotword_errors() {
        assert!(matches!(parse_hotwords("nocolon"), Err(CatalogError::Hotwords { line: 1, .. })));
        let err = Catalog::from_sources("a := d3", "b: x").unwrap_err();
        assert!(err.to_string().contains("known: a"));
    }

    #[test]
    fn subset_rejects_unknown() {
        let c = Catalog::builtin();
        assert!(c.subset(&["us_ssn".into()]).unwrap().len() == 1);
        assert!(c.subset(&["nope".into()]).is_err());
    }
}
