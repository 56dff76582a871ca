use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Semantic classes of the default benchmark taxonomy, in label order.
pub const DEFAULT_CLASS_NAMES: [&str; 17] = [
    "others",
    "barrier",
    "bicycle",
    "bus",
    "car",
    "construction_vehicle",
    "motorcycle",
    "pedestrian",
    "traffic_cone",
    "trailer",
    "truck",
    "driveable_surface",
    "other_flat",
    "sidewalk",
    "terrain",
    "manmade",
    "vegetation",
];

/// Countable ("thing") classes of the default taxonomy.
pub const DEFAULT_THING_NAMES: [&str; 8] = [
    "car",
    "truck",
    "construction_vehicle",
    "bus",
    "trailer",
    "motorcycle",
    "bicycle",
    "pedestrian",
];

/// Ordered class names plus the index of the "free" class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTaxonomy {
    names: Vec<String>,
    free_index: usize,
}

impl ClassTaxonomy {
    pub fn new(names: Vec<String>, free_index: usize) -> Result<Self, GridError> {
        if names.is_empty() {
            return Err(GridError::Taxonomy("no class names".into()));
        }
        if names.len() > 256 {
            return Err(GridError::Taxonomy(format!(
                "{} classes do not fit u8 labels",
                names.len()
            )));
        }
        if free_index >= names.len() {
            return Err(GridError::Taxonomy(format!(
                "free index {free_index} out of range for {} names",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(GridError::Taxonomy(format!("class {i} has an empty name")));
            }
            if names[..i].contains(name) {
                return Err(GridError::Taxonomy(format!(
                    "duplicate class name {name:?}"
                )));
            }
        }
        Ok(Self { names, free_index })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn free_index(&self) -> usize {
        self.free_index
    }

    pub fn free_label(&self) -> u8 {
        self.free_index as u8
    }

    pub fn name(&self, class: usize) -> Option<&str> {
        self.names.get(class).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_semantic(&self, class: usize) -> bool {
        class < self.names.len() && class != self.free_index
    }

    /// Every class index except the free one.
    pub fn semantic_classes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.names.len()).filter(move |&c| c != self.free_index)
    }
}

impl Default for ClassTaxonomy {
    /// The 17 benchmark classes followed by `free` at index 17.
    fn default() -> Self {
        let mut names: Vec<String> = DEFAULT_CLASS_NAMES.iter().map(|s| s.to_string()).collect();
        names.push("free".into());
        Self {
            free_index: names.len() - 1,
            names,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_free_last() {
        let t = ClassTaxonomy::default();
        assert_eq!(t.len(), 18);
        assert_eq!(t.free_index(), 17);
        assert_eq!(t.name(17), Some("free"));
        assert_eq!(t.semantic_classes().count(), 17);
        for thing in DEFAULT_THING_NAMES {
            assert!(t.index_of(thing).is_some(), "{thing}");
        }
    }

    #[test]
    fn rejects_bad_taxonomies() {
        assert!(ClassTaxonomy::new(vec![], 0).is_err());
        assert!(ClassTaxonomy::new(vec!["a".into()], 1).is_err());
        assert!(ClassTaxonomy::new(vec!["a".into(), "a".into()], 0).is_err());
        assert!(ClassTaxonomy::new(vec!["a".into(), "".into()], 0).is_err());
        assert!(ClassTaxonomy::new(vec!["a".into(), "free".into()], 1).is_ok());
    }
}
