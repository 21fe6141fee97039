use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conjugate::{ClassIndex, GaussianParams};
use crate::error::{Error, Result};

const TABLE_VERSION: u32 = 1;
const FRICTION_TABLE: &str = include_str!("../../data/friction_table1.csv");

/// One class row: name plus the class-conditional property Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub class: String,
    pub params: GaussianParams,
}

/// Ordered class → Gaussian table. Row order defines [`ClassIndex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyTable {
    pub property: String,
    pub contact: String,
    entries: Vec<PropertyEntry>,
}

/// How the spread figure of the door table is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadKind {
    /// The figure is σ².
    #[default]
    Variance,
    /// The figure is σ.
    StdDev,
}

#[derive(Debug, Deserialize)]
struct Row {
    class: String,
    mu: f64,
    sigma: f64,
}

impl PropertyTable {
    pub fn new(property: impl Into<String>, contact: impl Into<String>, entries: Vec<PropertyEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("property table has no rows"));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.class.as_str()) {
                return Err(Error::domain(format!("duplicate class `{}`", e.class)));
            }
            GaussianParams::new(e.params.mu, e.params.var)?;
        }
        Ok(Self {
            property: property.into(),
            contact: contact.into(),
            entries,
        })
    }

    /// The bundled friction table (rubber contact, eight terrain classes).
    pub fn friction() -> Self {
        Self::parse(FRICTION_TABLE, Path::new("<bundled friction table>"))
            .expect("bundled table is valid")
    }

    /// Signed door-opening force: push at −20 N and pull at +20 N, both
    /// with spread 10 read according to `spread`.
    pub fn door_forces(spread: SpreadKind) -> Self {
        let var = match spread {
            SpreadKind::Variance => 10.0,
            SpreadKind::StdDev => 100.0,
        };
        let entry = |class: &str, mu: f64| PropertyEntry {
            class: class.into(),
            params: GaussianParams::new(mu, var).expect("positive variance"),
        };
        Self::new("door opening force [N]", "handle", vec![entry("push", -20.0), entry("pull", 20.0)])
            .expect("valid door table")
    }

    /// Reads a table file: `# key: value` metadata lines followed by a CSV
    /// body with header `class,mu,sigma`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut meta = BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    meta.insert(key.trim().to_string(), value.trim().to_string());
                }
            } else if !trimmed.is_empty() {
                body.push_str(line);
                body.push('\n');
            }
        }
        if let Some(v) = meta.get("version") {
            let v: u32 = v.parse().map_err(|_| parse_err(format!("bad version `{v}`")))?;
            if v != TABLE_VERSION {
                return Err(parse_err(format!("unsupported table version {v}")));
            }
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let mut entries = Vec::new();
        for (line, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| parse_err(format!("row {}: {e}", line + 1)))?;
            let params = GaussianParams::from_mean_sd(row.mu, row.sigma)
                .map_err(|e| parse_err(format!("class `{}`: {e}", row.class)))?;
            entries.push(PropertyEntry { class: row.class, params });
        }
        Self::new(
            meta.remove("property").unwrap_or_default(),
            meta.remove("contact").unwrap_or_default(),
            entries,
        )
        .map_err(|e| parse_err(e.to_string()))
    }

    /// Serialises to the same format [`PropertyTable::parse`] reads.
    pub fn to_table_string(&self) -> String {
        let mut out = format!(
            "# version: {TABLE_VERSION}\n# property: {}\n# contact: {}\nclass,mu,sigma\n",
            self.property, self.contact
        );
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.class, e.params.mu, e.params.sd()));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PropertyEntry] {
        &self.entries
    }

    pub fn params(&self, i: ClassIndex) -> &GaussianParams {
        &self.entries[i.get()].params
    }

    pub fn class_names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.class.clone()).collect()
    }

    pub fn index_of(&self, class: &str) -> Option<ClassIndex> {
        self.entries.iter().position(|e| e.class == class).map(ClassIndex)
    }

    /// Sub-table keeping the named classes in the given order.
    pub fn select(&self, classes: &[&str]) -> Result<Self> {
        let entries = classes
            .iter()
            .map(|c| {
                self.index_of(c)
                    .map(|i| self.entries[i.get()].clone())
                    .ok_or_else(|| Error::domain(format!("class `{c}` not in table")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.property.clone(), self.contact.clone(), entries)
    }
}
