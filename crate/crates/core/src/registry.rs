//! Name-keyed registry of interchangeable strategies.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Strategies of one family, boxed behind a common trait and looked up by name.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, strategy: Box<T>) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::DuplicateStrategy {
                kind: self.kind,
                name: name.to_string(),
            });
        }
        self.entries.insert(name.to_string(), strategy);
        Ok(())
    }

    /// Builder form of [`Registry::register`]; panics on a duplicate name.
    pub fn with(mut self, name: &str, strategy: Box<T>) -> Self {
        self.register(name, strategy)
            .expect("duplicate strategy name in builder");
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}

impl<T: ?Sized> std::fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names())
            .finish()
    }
}
