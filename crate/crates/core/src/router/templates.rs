use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{Module, RouterError};

pub const TEMPLATE_VERSION: u32 = 1;

/// Prompt templates keyed by module. Placeholders: `{question}`,
/// `{answer_a}` (SQL answer), `{answer_b}` (E2E answer), `{table}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemplateSet {
    templates: BTreeMap<Module, String>,
}

impl TemplateSet {
    pub fn empty() -> Self {
        TemplateSet::default()
    }

    /// The templates shipped with the crate.
    pub fn builtin() -> Self {
        let templates = BTreeMap::from([
            (Module::Similarity, include_str!("../../templates/similarity.v1.txt")),
            (Module::Relevance, include_str!("../../templates/relevance.v1.txt")),
            (Module::Alignment, include_str!("../../templates/alignment.v1.txt")),
            (Module::Comparison, include_str!("../../templates/comparison.v1.txt")),
            (Module::Contradiction, include_str!("../../templates/contradiction.v1.txt")),
        ]);
        TemplateSet {
            templates: templates.into_iter().map(|(m, t)| (m, t.to_string())).collect(),
        }
    }

    /// Reads `<module>.v<version>.txt` files from `dir`; absent files leave
    /// the module without a template.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut templates = BTreeMap::new();
        for m in Module::ALL {
            let path = dir.join(format!("{}.v{TEMPLATE_VERSION}.txt", m.name()));
            if path.exists() {
                templates.insert(m, fs::read_to_string(&path)?);
            }
        }
        Ok(TemplateSet { templates })
    }

    pub fn insert(&mut self, module: Module, template: impl Into<String>) {
        self.templates.insert(module, template.into());
    }

    pub fn render(
        &self,
        module: Module,
        question: &str,
        answer_a: &str,
        answer_b: &str,
        table: &str,
    ) -> Result<String, RouterError> {
        let t = self.templates.get(&module).ok_or(RouterError::TemplateMissing(module))?;
        // single pass so placeholder-like text inside values is not expanded
        let mut out = String::with_capacity(t.len() + table.len());
        let mut rest = t.as_str();
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let tail = &rest[start..];
            let value = [
                ("{question}", question),
                ("{answer_a}", answer_a),
                ("{answer_b}", answer_b),
                ("{table}", table),
            ]
            .into_iter()
            .find(|(p, _)| tail.starts_with(p));
            match value {
                Some((p, v)) => {
                    out.push_str(v);
                    rest = &tail[p.len()..];
                }
                None => {
                    out.push('{');
                    rest = &tail[1..];
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_every_module() {
        let set = TemplateSet::builtin();
        for m in Module::ALL {
            let p = set.render(m, "Q?", "AAA", "BBB", "TTT").unwrap();
            assert!(p.contains("Q?"));
            assert!(!p.contains("{question}"));
        }
        assert!(set.render(Module::Contradiction, "q", "a", "b", "TTT").unwrap().contains("TTT"));
    }

    #[test]
    fn values_are_not_re_expanded() {
        let mut set = TemplateSet::empty();
        set.insert(Module::Similarity, "{question}|{answer_a}|{other}");
        let p = set.render(Module::Similarity, "{answer_a}", "x", "y", "").unwrap();
        assert_eq!(p, "{answer_a}|x|{other}");
    }

    #[test]
    fn directory_loading() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("comparison.v1.txt"), "pick {answer_a} or {answer_b}").unwrap();
        let set = TemplateSet::from_dir(dir.path()).unwrap();
        assert_eq!(set.render(Module::Comparison, "", "1", "2", "").unwrap(), "pick 1 or 2");
        assert_eq!(
            set.render(Module::Relevance, "", "", "", ""),
            Err(RouterError::TemplateMissing(Module::Relevance))
        );
    }
}
