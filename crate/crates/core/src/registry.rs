//! Name-keyed constructors for pluggable strategies.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};

pub type Constructor<T> = fn(&Value) -> Result<T>;

pub struct Registry<T> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Constructor<T>>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &'static str, ctor: Constructor<T>) -> &mut Self {
        self.entries.insert(name, ctor);
        self
    }

    pub fn with(mut self, name: &'static str, ctor: Constructor<T>) -> Self {
        self.register(name, ctor);
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn build(&self, name: &str, params: &Value) -> Result<T> {
        let ctor = self.entries.get(name).ok_or_else(|| {
            Error::Config(format!("unknown {} '{}' (known: {})", self.kind, name, self.names().join(", ")))
        })?;
        ctor(params)
    }
}
