//! A set of source files resolved together. Theories, models, translations,
//! t-maps, categories, lattices, extensions and certificates are looked up by
//! name; a theory `T` that no loaded file defines is read from `t.th` next
//! to the files already loaded.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use thiserror::Error;

use crate::catlogic::{elaborate_category, elaborate_lattice, BDLattice, FinCatPresentation};
use crate::model::FiniteModel;
use crate::morita::{elaborate_extend, ExtensionResult};
use crate::parse::{
    elaborate_model, elaborate_theory, parse_document, ParseError, RawCertificate, RawCategory, RawExtend, RawItem,
    RawLattice, RawModel, RawTMap, RawTheory, RawTranslation,
};
use crate::syntax::Theory;
use crate::translation::{compose_translations, elaborate_tmap, elaborate_translation, Reconstrual, TMap};

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{path}: {err}")]
    Parse { path: String, err: ParseError },
    #[error("unknown {kind} {name}")]
    Unknown { kind: &'static str, name: String },
    #[error("{kind} {name} is defined twice")]
    Duplicate { kind: &'static str, name: String },
    #[error("{kind} {name}: {msg}")]
    Invalid { kind: &'static str, name: String, msg: String },
    #[error("{0} depends on itself")]
    Cycle(String),
}

#[derive(Debug, Clone)]
struct Sourced<T> {
    path: String,
    raw: T,
}

#[derive(Debug, Default)]
pub struct Workspace {
    dirs: Vec<PathBuf>,
    loaded: BTreeSet<PathBuf>,
    raw_theories: IndexMap<String, Sourced<RawTheory>>,
    raw_extends: IndexMap<String, Sourced<RawExtend>>,
    raw_models: IndexMap<String, Sourced<RawModel>>,
    raw_translations: IndexMap<String, Sourced<RawTranslation>>,
    raw_tmaps: IndexMap<String, Sourced<RawTMap>>,
    raw_categories: IndexMap<String, Sourced<RawCategory>>,
    raw_lattices: IndexMap<String, Sourced<RawLattice>>,
    certificates: IndexMap<String, RawCertificate>,
    theories: IndexMap<String, Theory>,
    extensions: IndexMap<String, ExtensionResult>,
    pending: BTreeSet<String>,
}

fn dup<T>(map: &IndexMap<String, T>, kind: &'static str, name: &str) -> Result<(), WorkspaceError> {
    if map.contains_key(name) {
        return Err(WorkspaceError::Duplicate { kind, name: name.to_string() });
    }
    Ok(())
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open(paths: &[impl AsRef<Path>]) -> Result<Self, WorkspaceError> {
        let mut ws = Self::new();
        for p in paths {
            ws.load_file(p.as_ref())?;
        }
        Ok(ws)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), WorkspaceError> {
        let key = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        if self.loaded.contains(&key) {
            return Ok(());
        }
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| WorkspaceError::Io {
            path: shown.clone(),
            msg: e.to_string(),
        })?;
        self.loaded.insert(key);
        if let Some(dir) = path.parent() {
            let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir.to_path_buf() };
            if !self.dirs.contains(&dir) {
                self.dirs.push(dir);
            }
        }
        self.load_text(&shown, &text)
    }

    /// Add the items of `text`, reporting errors against `path`.
    pub fn load_text(&mut self, path: &str, text: &str) -> Result<(), WorkspaceError> {
        let items = parse_document(text).map_err(|err| WorkspaceError::Parse {
            path: path.to_string(),
            err,
        })?;
        let path = path.to_string();
        for item in items {
            match item {
                RawItem::Theory(raw) => {
                    dup(&self.raw_theories, "theory", &raw.name)?;
                    dup(&self.raw_extends, "theory", &raw.name)?;
                    self.raw_theories.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Extend(raw) => {
                    dup(&self.raw_theories, "theory", &raw.into)?;
                    dup(&self.raw_extends, "theory", &raw.into)?;
                    self.raw_extends.insert(raw.into.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Model(raw) => {
                    dup(&self.raw_models, "model", &raw.name)?;
                    self.raw_models.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Translation(raw) => {
                    dup(&self.raw_translations, "translation", &raw.name)?;
                    self.raw_translations.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::TMap(raw) => {
                    dup(&self.raw_tmaps, "tmap", &raw.name)?;
                    self.raw_tmaps.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Category(raw) => {
                    dup(&self.raw_categories, "category", &raw.name)?;
                    self.raw_categories.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Lattice(raw) => {
                    dup(&self.raw_lattices, "lattice", &raw.name)?;
                    self.raw_lattices.insert(raw.name.clone(), Sourced { path: path.clone(), raw });
                }
                RawItem::Certificate(raw) => {
                    dup(&self.certificates, "certificate", &raw.name)?;
                    self.certificates.insert(raw.name.clone(), raw);
                }
            }
        }
        Ok(())
    }

    /// Names of the items of each kind, in load order.
    pub fn theory_names(&self) -> Vec<String> {
        self.raw_theories.keys().chain(self.raw_extends.keys()).cloned().collect()
    }

    pub fn model_names(&self) -> Vec<String> {
        self.raw_models.keys().cloned().collect()
    }

    pub fn translation_names(&self) -> Vec<String> {
        self.raw_translations.keys().cloned().collect()
    }

    pub fn tmap_names(&self) -> Vec<String> {
        self.raw_tmaps.keys().cloned().collect()
    }

    pub fn category_names(&self) -> Vec<String> {
        self.raw_categories.keys().cloned().collect()
    }

    pub fn lattice_names(&self) -> Vec<String> {
        self.raw_lattices.keys().cloned().collect()
    }

    pub fn extension_names(&self) -> Vec<String> {
        self.raw_extends.keys().cloned().collect()
    }

    pub fn certificate(&self, name: &str) -> Result<&RawCertificate, WorkspaceError> {
        self.certificates.get(name).ok_or_else(|| WorkspaceError::Unknown {
            kind: "certificate",
            name: name.to_string(),
        })
    }

    pub fn certificate_names(&self) -> Vec<String> {
        self.certificates.keys().cloned().collect()
    }

    fn autoload(&mut self, name: &str) -> Result<(), WorkspaceError> {
        let file = format!("{}.th", name.to_lowercase());
        for dir in self.dirs.clone() {
            let p = dir.join(&file);
            if p.is_file() {
                self.load_file(&p)?;
                if self.raw_theories.contains_key(name) || self.raw_extends.contains_key(name) {
                    break;
                }
            }
        }
        Ok(())
    }

    pub fn theory(&mut self, name: &str) -> Result<Theory, WorkspaceError> {
        if let Some(t) = self.theories.get(name) {
            return Ok(t.clone());
        }
        if !self.raw_theories.contains_key(name) && !self.raw_extends.contains_key(name) {
            self.autoload(name)?;
        }
        if !self.pending.insert(name.to_string()) {
            return Err(WorkspaceError::Cycle(name.to_string()));
        }
        let out = self.elaborate_theory(name);
        self.pending.remove(name);
        let t = out?;
        self.theories.insert(name.to_string(), t.clone());
        Ok(t)
    }

    fn elaborate_theory(&mut self, name: &str) -> Result<Theory, WorkspaceError> {
        if let Some(src) = self.raw_theories.get(name).cloned() {
            let base = match &src.raw.extends {
                Some(b) => Some(self.theory(b)?),
                None => None,
            };
            return elaborate_theory(&src.raw, &|_| base.clone()).map_err(|err| WorkspaceError::Parse { path: src.path, err });
        }
        if let Some(src) = self.raw_extends.get(name).cloned() {
            let base = self.theory(&src.raw.theory)?;
            let ext = elaborate_extend(&src.raw, &base).map_err(|e| WorkspaceError::Invalid {
                kind: "extension",
                name: name.to_string(),
                msg: e.to_string(),
            })?;
            let t = ext.theory.clone();
            self.extensions.insert(name.to_string(), ext);
            return Ok(t);
        }
        Err(WorkspaceError::Unknown {
            kind: "theory",
            name: name.to_string(),
        })
    }

    /// The extension declared with `into name`.
    pub fn extension(&mut self, name: &str) -> Result<ExtensionResult, WorkspaceError> {
        if !self.raw_extends.contains_key(name) {
            return Err(WorkspaceError::Unknown {
                kind: "extension",
                name: name.to_string(),
            });
        }
        self.theory(name)?;
        Ok(self.extensions[name].clone())
    }

    pub fn model(&mut self, name: &str) -> Result<(Theory, FiniteModel), WorkspaceError> {
        let src = self.raw_models.get(name).cloned().ok_or_else(|| WorkspaceError::Unknown {
            kind: "model",
            name: name.to_string(),
        })?;
        let t = self.theory(&src.raw.theory)?;
        let m = elaborate_model(&src.raw, &t).map_err(|err| WorkspaceError::Parse { path: src.path, err })?;
        Ok((t, m))
    }

    /// Models declared for the theory `theory`, in load order.
    pub fn models_of(&mut self, theory: &str) -> Result<Vec<(String, FiniteModel)>, WorkspaceError> {
        let names: Vec<String> = self
            .raw_models
            .iter()
            .filter(|(_, s)| s.raw.theory == theory)
            .map(|(n, _)| n.clone())
            .collect();
        names
            .into_iter()
            .map(|n| self.model(&n).map(|(_, m)| (n, m)))
            .collect()
    }

    pub fn translation(&mut self, name: &str) -> Result<Reconstrual, WorkspaceError> {
        let src = self.raw_translations.get(name).cloned().ok_or_else(|| WorkspaceError::Unknown {
            kind: "translation",
            name: name.to_string(),
        })?;
        let s = self.theory(&src.raw.source)?;
        let t = self.theory(&src.raw.target)?;
        elaborate_translation(&src.raw, &s, &t).map_err(|e| WorkspaceError::Invalid {
            kind: "translation",
            name: name.to_string(),
            msg: e.to_string(),
        })
    }

    /// A path `H.G.F` of translations, composed right to left; `id` stands
    /// for the identity of `theory` and may only appear alone.
    pub fn translation_path(&mut self, path: &str, theory: Option<&Theory>) -> Result<Reconstrual, WorkspaceError> {
        let invalid = |msg: String| WorkspaceError::Invalid {
            kind: "translation path",
            name: path.to_string(),
            msg,
        };
        if path == "id" {
            let t = theory.ok_or_else(|| invalid("the theory of id cannot be inferred".into()))?;
            return Ok(Reconstrual::identity(t));
        }
        let parts: Vec<&str> = path.split('.').collect();
        let mut acc: Option<Reconstrual> = None;
        for p in parts.iter().rev() {
            let f = self.translation(p)?;
            acc = Some(match acc {
                None => f,
                Some(prev) => compose_translations(&prev, &f).map_err(|e| invalid(e.to_string()))?,
            });
        }
        acc.ok_or_else(|| invalid("empty path".into()))
    }

    pub fn tmap(&mut self, name: &str) -> Result<TMap, WorkspaceError> {
        let src = self.raw_tmaps.get(name).cloned().ok_or_else(|| WorkspaceError::Unknown {
            kind: "tmap",
            name: name.to_string(),
        })?;
        let (from, to) = match (src.raw.from.as_str(), src.raw.to.as_str()) {
            ("id", "id") => {
                return Err(WorkspaceError::Invalid {
                    kind: "tmap",
                    name: name.to_string(),
                    msg: "both endpoints are id".into(),
                })
            }
            ("id", to) => {
                let g = self.translation_path(to, None)?;
                (Reconstrual::identity(&g.source), g)
            }
            (from, "id") => {
                let f = self.translation_path(from, None)?;
                let id = Reconstrual::identity(&f.source);
                (f, id)
            }
            (from, to) => (self.translation_path(from, None)?, self.translation_path(to, None)?),
        };
        elaborate_tmap(&src.raw, &from, &to).map_err(|e| WorkspaceError::Invalid {
            kind: "tmap",
            name: name.to_string(),
            msg: e.to_string(),
        })
    }

    pub fn category(&self, name: &str) -> Result<FinCatPresentation, WorkspaceError> {
        let src = self.raw_categories.get(name).ok_or_else(|| WorkspaceError::Unknown {
            kind: "category",
            name: name.to_string(),
        })?;
        elaborate_category(&src.raw).map_err(|e| WorkspaceError::Invalid {
            kind: "category",
            name: name.to_string(),
            msg: e.to_string(),
        })
    }

    pub fn lattice(&self, name: &str) -> Result<BDLattice, WorkspaceError> {
        let src = self.raw_lattices.get(name).ok_or_else(|| WorkspaceError::Unknown {
            kind: "lattice",
            name: name.to_string(),
        })?;
        elaborate_lattice(&src.raw).map_err(|e| WorkspaceError::Invalid {
            kind: "lattice",
            name: name.to_string(),
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "
        theory EQ { sort s  rel A : s s  ax refl : |- A(x,x)  ax symm : A(x,y) |- A(y,x)
                    ax trans : A(x,y), A(y,z) |- A(x,z) }
        theory EQ2 extends EQ { rel B : s }
        translation F : EQ -> EQ { rel A => F(x, y) := A(y, x) }
        tmap chi : F.F => id { sort s => chi(x | y) := x = y }
        extend EQ with quotient s by A as q via p into EQQ
        model M : EQ2 { sort s = {0, 1}  rel A = {(0,0), (1,1)}  rel B = {(0)} }
    ";

    #[test]
    fn names_resolve_across_items() {
        let mut ws = Workspace::new();
        ws.load_text("doc", DOC).unwrap();
        assert_eq!(ws.theory("EQ2").unwrap().signature.relations.len(), 2);
        let chi = ws.tmap("chi").unwrap();
        assert_eq!(chi.from.source.name, "EQ");
        assert_eq!(chi.to.name, Reconstrual::identity(&chi.from.source).name);
        assert!(ws.theory("EQQ").unwrap().signature.has_sort("q"));
        let (t, m) = ws.model("M").unwrap();
        assert_eq!(t.name, "EQ2");
        assert_eq!(m.size("s"), 2);
        assert_eq!(ws.extension("EQQ").unwrap().specs.len(), 1);
    }

    #[test]
    fn missing_and_duplicate_names() {
        let mut ws = Workspace::new();
        ws.load_text("doc", DOC).unwrap();
        assert!(matches!(ws.theory("NOPE"), Err(WorkspaceError::Unknown { .. })));
        let e = ws.load_text("again", "theory EQ { sort s }").unwrap_err();
        assert!(matches!(e, WorkspaceError::Duplicate { .. }));
    }

    #[test]
    fn cycles_are_reported() {
        let mut ws = Workspace::new();
        ws.load_text("doc", "theory A extends B { }  theory B extends A { }").unwrap();
        assert!(matches!(ws.theory("A"), Err(WorkspaceError::Cycle(_))));
    }

    #[test]
    fn theories_load_from_sibling_files() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let mut ws = Workspace::new();
        ws.load_file(&dir.join("p2.th")).unwrap();
        assert_eq!(ws.theory("EQ").unwrap().axioms.len(), 3);
    }
}
