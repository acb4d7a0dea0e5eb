//! Subject pools and their file formats.
//!
//! JSON pools (`revpref-data/1`) carry the universe, the shared menus and one
//! choice per menu for every subject. The CSV form is long format
//! (`subject_id,menu_index,choice_id`) next to a JSON menus file
//! (`revpref-menus/1`).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use revpref_core::data::{
    validate_dataset, Alternative, ChoiceDataset, DataError, Menu, RawAlternative, RawDataset,
    RawObservation,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const POOL_SCHEMA: &str = "revpref-data/1";
pub const MENUS_SCHEMA: &str = "revpref-menus/1";

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid subjects: {}", format_subject_errors(.0))]
    Subjects(Vec<(String, DataError)>),
}

fn format_subject_errors(errors: &[(String, DataError)]) -> String {
    errors
        .iter()
        .map(|(id, e)| format!("subject {id}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subject {
    pub id: String,
    pub data: ChoiceDataset,
}

/// Subjects observed on one shared menu collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectPool {
    pub alternatives: Vec<Alternative>,
    pub menus: Vec<Menu>,
    pub subjects: Vec<Subject>,
}

impl SubjectPool {
    pub fn n(&self) -> usize {
        self.alternatives.len()
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn subject(&self, id: &str) -> Option<&Subject> {
        self.subjects.iter().find(|s| s.id == id)
    }

    /// Builds a pool from per-subject choice vectors aligned with `menus`.
    pub fn from_choices(
        alternatives: Vec<Alternative>,
        menus: Vec<Menu>,
        subjects: impl IntoIterator<Item = (String, Vec<usize>)>,
    ) -> Result<Self, PoolError> {
        let raw_alts: Vec<RawAlternative> = alternatives
            .iter()
            .map(|a| RawAlternative {
                id: a.id,
                label: a.label.clone(),
                payments: a.payments,
            })
            .collect();
        let mut out = Vec::new();
        let mut errors = Vec::new();
        for (id, choices) in subjects {
            if choices.len() != menus.len() {
                return Err(PoolError::Schema(format!(
                    "subject {id} has {} choices for {} menus",
                    choices.len(),
                    menus.len()
                )));
            }
            let raw = RawDataset {
                alternatives: raw_alts.clone(),
                observations: menus
                    .iter()
                    .zip(&choices)
                    .map(|(m, &c)| RawObservation {
                        menu: m.iter().collect(),
                        choice: c,
                    })
                    .collect(),
            };
            match validate_dataset(&raw) {
                Ok(data) => out.push(Subject { id, data }),
                Err(e) => errors.push((id, e)),
            }
        }
        if !errors.is_empty() {
            return Err(PoolError::Subjects(errors));
        }
        Ok(Self {
            alternatives,
            menus,
            subjects: out,
        })
    }

    /// Choice vector of every subject, aligned with `menus`.
    pub fn choice_vectors(&self) -> Vec<Vec<usize>> {
        self.subjects
            .iter()
            .map(|s| s.data.observations().iter().map(|o| o.choice).collect())
            .collect()
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(to_json(self).as_bytes()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlternativeFile {
    id: usize,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payments: Option<[u32; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubjectFile {
    id: String,
    choices: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolFile {
    schema: String,
    alternatives: Vec<AlternativeFile>,
    menus: Vec<Vec<usize>>,
    subjects: Vec<SubjectFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MenusFile {
    schema: String,
    alternatives: Vec<AlternativeFile>,
    menus: Vec<Vec<usize>>,
}

fn check_schema(found: &str, expected: &str) -> Result<(), PoolError> {
    if found == expected {
        Ok(())
    } else {
        Err(PoolError::Schema(format!(
            "expected schema \"{expected}\", found \"{found}\""
        )))
    }
}

fn alternatives_from(files: Vec<AlternativeFile>) -> Vec<Alternative> {
    files
        .into_iter()
        .map(|a| Alternative {
            id: a.id,
            label: a.label,
            payments: a.payments,
        })
        .collect()
}

fn alternatives_to(alts: &[Alternative]) -> Vec<AlternativeFile> {
    alts.iter()
        .map(|a| AlternativeFile {
            id: a.id,
            label: a.label.clone(),
            payments: a.payments,
        })
        .collect()
}

fn menus_from(raw: &[Vec<usize>], n: usize) -> Result<Vec<Menu>, PoolError> {
    raw.iter()
        .enumerate()
        .map(|(i, ids)| {
            if let Some(&bad) = ids.iter().find(|&&id| id >= n) {
                return Err(PoolError::Schema(format!(
                    "menu {i} references unknown alternative {bad}"
                )));
            }
            let menu = Menu::from_ids(ids.iter().copied());
            if menu.len() != ids.len() {
                return Err(PoolError::Schema(format!(
                    "menu {i} lists an alternative twice"
                )));
            }
            Ok(menu)
        })
        .collect()
}

fn check_universe(alts: &[Alternative]) -> Result<(), PoolError> {
    if alts.len() > revpref_core::data::MAX_ALTERNATIVES {
        return Err(PoolError::Schema(format!(
            "{} alternatives exceed the supported {}",
            alts.len(),
            revpref_core::data::MAX_ALTERNATIVES
        )));
    }
    Ok(())
}

pub fn parse_pool_json(text: &str) -> Result<SubjectPool, PoolError> {
    let file: PoolFile = serde_json::from_str(text).map_err(|e| PoolError::Parse(e.to_string()))?;
    check_schema(&file.schema, POOL_SCHEMA)?;
    let alternatives = alternatives_from(file.alternatives);
    check_universe(&alternatives)?;
    let menus = menus_from(&file.menus, alternatives.len())?;
    let mut seen = HashMap::new();
    for s in &file.subjects {
        if seen.insert(s.id.clone(), ()).is_some() {
            return Err(PoolError::Schema(format!("duplicate subject id {}", s.id)));
        }
    }
    SubjectPool::from_choices(
        alternatives,
        menus,
        file.subjects.into_iter().map(|s| (s.id, s.choices)),
    )
}

/// Parses a menus sidecar: the universe and the shared menu collection.
pub fn parse_menus_json(text: &str) -> Result<(Vec<Alternative>, Vec<Menu>), PoolError> {
    let file: MenusFile =
        serde_json::from_str(text).map_err(|e| PoolError::Parse(e.to_string()))?;
    check_schema(&file.schema, MENUS_SCHEMA)?;
    let alternatives = alternatives_from(file.alternatives);
    check_universe(&alternatives)?;
    let menus = menus_from(&file.menus, alternatives.len())?;
    Ok((alternatives, menus))
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    subject_id: String,
    menu_index: usize,
    choice_id: usize,
}

/// Long-format choices plus the menus sidecar. Subjects keep the order of
/// their first row.
pub fn parse_pool_csv(csv_text: &str, menus_json: &str) -> Result<SubjectPool, PoolError> {
    let (alternatives, menus) = parse_menus_json(menus_json)?;
    let mut order: Vec<String> = Vec::new();
    let mut choices: HashMap<String, Vec<Option<usize>>> = HashMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    for (line, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| PoolError::Parse(format!("row {}: {e}", line + 1)))?;
        if row.menu_index >= menus.len() {
            return Err(PoolError::Schema(format!(
                "row {}: menu index {} out of range",
                line + 1,
                row.menu_index
            )));
        }
        let slots = choices.entry(row.subject_id.clone()).or_insert_with(|| {
            order.push(row.subject_id.clone());
            vec![None; menus.len()]
        });
        if slots[row.menu_index].replace(row.choice_id).is_some() {
            return Err(PoolError::Schema(format!(
                "subject {} has two rows for menu {}",
                row.subject_id, row.menu_index
            )));
        }
    }
    let mut subjects = Vec::with_capacity(order.len());
    for id in order {
        let slots = choices.remove(&id).expect("recorded subject");
        let filled: Option<Vec<usize>> = slots.iter().copied().collect();
        match filled {
            Some(v) => subjects.push((id, v)),
            None => {
                let missing = slots.iter().position(|s| s.is_none()).unwrap();
                return Err(PoolError::Schema(format!(
                    "subject {id} has no choice for menu {missing}"
                )));
            }
        }
    }
    SubjectPool::from_choices(alternatives, menus, subjects)
}

/// Input format of [`load_pool`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolFormat {
    Json,
    /// Long CSV with the path of the menus sidecar.
    Csv {
        menus: std::path::PathBuf,
    },
}

fn read(path: &Path) -> Result<String, PoolError> {
    fs::read_to_string(path).map_err(|source| PoolError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_pool(path: &Path, format: &PoolFormat) -> Result<SubjectPool, PoolError> {
    let text = read(path)?;
    match format {
        PoolFormat::Json => parse_pool_json(&text),
        PoolFormat::Csv { menus } => parse_pool_csv(&text, &read(menus)?),
    }
}

/// Canonical pretty JSON (stable field order, one menu or subject per line).
pub fn to_json(pool: &SubjectPool) -> String {
    let file = PoolFile {
        schema: POOL_SCHEMA.to_string(),
        alternatives: alternatives_to(&pool.alternatives),
        menus: pool.menus.iter().map(|m| m.iter().collect()).collect(),
        subjects: pool
            .subjects
            .iter()
            .zip(pool.choice_vectors())
            .map(|(s, choices)| SubjectFile {
                id: s.id.clone(),
                choices,
            })
            .collect(),
    };
    fn block<T: Serialize>(out: &mut String, key: &str, items: &[T], last: bool) {
        out.push_str(&format!("  \"{key}\": ["));
        for (j, item) in items.iter().enumerate() {
            out.push_str(if j == 0 { "\n    " } else { ",\n    " });
            out.push_str(&serde_json::to_string(item).expect("pool serializes"));
        }
        out.push_str(if items.is_empty() { "]" } else { "\n  ]" });
        out.push_str(if last { "\n" } else { ",\n" });
    }
    let mut out = format!(
        "{{\n  \"schema\": {},\n",
        serde_json::to_string(&file.schema).unwrap()
    );
    block(&mut out, "alternatives", &file.alternatives, false);
    block(&mut out, "menus", &file.menus, false);
    block(&mut out, "subjects", &file.subjects, true);
    out.push_str("}\n");
    out
}

/// The menus sidecar for the CSV format.
pub fn menus_to_json(alternatives: &[Alternative], menus: &[Menu]) -> String {
    let file = MenusFile {
        schema: MENUS_SCHEMA.to_string(),
        alternatives: alternatives_to(alternatives),
        menus: menus.iter().map(|m| m.iter().collect()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("menus serialize") + "\n"
}

/// Long-format CSV rows, subjects in pool order, menus ascending.
pub fn to_csv(pool: &SubjectPool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject_id", "menu_index", "choice_id"])
        .unwrap();
    for (s, choices) in pool.subjects.iter().zip(pool.choice_vectors()) {
        for (i, c) in choices.iter().enumerate() {
            w.write_record([s.id.clone(), i.to_string(), c.to_string()])
                .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
