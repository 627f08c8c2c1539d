//! Structural subsumption and taxonomy construction.
//!
//! Subsumption is decided directly on normal forms: the general form's atoms
//! and role constraints must each be entailed by the specific form. The
//! taxonomy arranges all named concepts (plus synthetic top and bottom
//! nodes) into the transitive reduction of the subsumption preorder, merging
//! names that subsume each other into a single node.

use std::collections::BTreeSet;

use crate::tbox::{NormalForm, TBox};
use crate::term::Sym;

pub fn coherent(nf: &NormalForm) -> bool {
    !nf.bottom
}

/// Does `general` subsume `specific` — is every instance of the specific
/// form necessarily an instance of the general one?
pub fn subsumes(general: &NormalForm, specific: &NormalForm) -> bool {
    if specific.bottom {
        return true;
    }
    if general.bottom {
        return false;
    }
    if !general.primitives.is_subset(&specific.primitives) {
        return false;
    }
    for (key, want) in &general.roles {
        // A key with more primitive role names denotes a smaller relation:
        // fillers for `key` are fillers for every subset key.
        if !want.value.is_top() {
            let entailed = specific.roles.iter().any(|(k, have)| {
                k.is_subset(key)
                    && (subsumes(&want.value, &have.value) || have.max == Some(0))
            });
            if !entailed {
                return false;
            }
        }
        if want.min > 0 {
            let entailed = specific
                .roles
                .iter()
                .any(|(k, have)| key.is_subset(k) && have.min >= want.min);
            if !entailed {
                return false;
            }
        }
        if let Some(max) = want.max {
            let entailed = specific.roles.iter().any(|(k, have)| {
                k.is_subset(key) && have.max.is_some_and(|m| m <= max)
            });
            if !entailed {
                return false;
            }
        }
    }
    true
}

/// One node of the taxonomy: a set of mutually subsuming names.
#[derive(Debug, Clone)]
pub struct TaxNode {
    /// Sorted names sharing this node; empty for the synthetic top/bottom.
    pub labels: Vec<Sym>,
    pub parents: BTreeSet<usize>,
    pub children: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    pub nodes: Vec<TaxNode>,
    pub top: usize,
    pub bottom: usize,
}

impl Taxonomy {
    /// The name a node prints under.
    pub fn display_name(&self, node: usize) -> String {
        if node == self.top {
            return "*top*".into();
        }
        if node == self.bottom && self.nodes[node].labels.is_empty() {
            return "*bottom*".into();
        }
        match self.nodes[node].labels.first() {
            Some(l) => l.to_string(),
            None => "*bottom*".into(),
        }
    }

    fn node_heading(&self, node: usize) -> String {
        let base = self.display_name(node);
        let n = &self.nodes[node];
        if n.labels.len() > 1 {
            let rest: Vec<String> = n.labels[1..].iter().map(|s| s.to_string()).collect();
            format!("{base} (= {})", rest.join(" = "))
        } else if node == self.bottom && !n.labels.is_empty() {
            format!("*bottom* (= {})", n.labels.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" = "))
        } else {
            base
        }
    }

    /// Indented tree, top-down. Nodes with several parents appear once under
    /// each parent.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        self.render_from(self.top, 0, &mut out);
        out
    }

    fn render_from(&self, node: usize, depth: usize, out: &mut String) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str(&self.node_heading(node));
        out.push('\n');
        for &child in &self.nodes[node].children {
            self.render_from(child, depth + 1, out);
        }
    }

    /// Machine form: one `parent child` pair per line, sorted.
    pub fn render_edges(&self) -> String {
        let mut lines = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                lines.push(format!("{} {}", self.display_name(i), self.display_name(c)));
            }
        }
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    /// Direct-edge pairs by display name, for tests.
    pub fn edges(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                out.insert((self.display_name(i), self.display_name(c)));
            }
        }
        out
    }
}

/// Arrange every named concept into the subsumption taxonomy.
pub fn classify(tbox: &TBox) -> Taxonomy {
    let names: Vec<Sym> = tbox.concept_names().cloned().collect();
    let top_nf = NormalForm::top();
    let bottom_nf = NormalForm::incoherent();
    // item 0 is top, item len-1 is bottom, names in between
    let mut nfs: Vec<&NormalForm> = Vec::with_capacity(names.len() + 2);
    nfs.push(&top_nf);
    for n in &names {
        nfs.push(&tbox.concept(n).unwrap().nf);
    }
    nfs.push(&bottom_nf);
    let count = nfs.len();

    let mut sub = vec![vec![false; count]; count];
    for i in 0..count {
        for j in 0..count {
            sub[i][j] = subsumes(nfs[i], nfs[j]);
        }
    }

    // group mutually subsuming items
    let mut class_of = vec![usize::MAX; count];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..count {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![i];
        class_of[i] = id;
        for j in i + 1..count {
            if class_of[j] == usize::MAX && sub[i][j] && sub[j][i] {
                class_of[j] = id;
                members.push(j);
            }
        }
        classes.push(members);
    }

    let top_class = class_of[0];
    let bottom_class = class_of[count - 1];
    let strictly_above = |a: usize, b: usize| -> bool {
        a != b && sub[classes[a][0]][classes[b][0]]
    };

    // order nodes: top, named classes sorted by first label, bottom
    let mut order: Vec<usize> = (0..classes.len())
        .filter(|&c| c != top_class && c != bottom_class)
        .collect();
    let label_of = |c: usize| -> Vec<Sym> {
        classes[c]
            .iter()
            .filter(|&&i| i != 0 && i != count - 1)
            .map(|&i| names[i - 1].clone())
            .collect()
    };
    order.sort_by_key(|&c| label_of(c));
    let mut placed = vec![top_class];
    placed.extend(order);
    placed.push(bottom_class);
    let node_of: std::collections::BTreeMap<usize, usize> =
        placed.iter().enumerate().map(|(n, &c)| (c, n)).collect();

    let mut nodes: Vec<TaxNode> = placed
        .iter()
        .map(|&c| TaxNode {
            labels: label_of(c),
            parents: BTreeSet::new(),
            children: BTreeSet::new(),
        })
        .collect();

    // transitive reduction over the class ordering
    for &a in &placed {
        for &b in &placed {
            if !strictly_above(a, b) {
                continue;
            }
            let direct = !placed
                .iter()
                .any(|&c| strictly_above(a, c) && strictly_above(c, b));
            if direct {
                nodes[node_of[&a]].children.insert(node_of[&b]);
                nodes[node_of[&b]].parents.insert(node_of[&a]);
            }
        }
    }

    Taxonomy {
        nodes,
        top: node_of[&top_class],
        bottom: node_of[&bottom_class],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tbox::tbox_from;

    #[test]
    fn subsumption_follows_structure() {
        let tbox = tbox_from(
            "(defconcept Male (:primitive))\n\
             (defconcept College-Graduate (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept Father (:and Male (:at-least 1 Child)))\n\
             (defconcept Successful-Father (:and Father (:all Child College-Graduate)))",
        );
        let nf = |n: &str| &tbox.concept(&n.into()).unwrap().nf;
        assert!(subsumes(nf("Male"), nf("Father")));
        assert!(subsumes(nf("Father"), nf("Successful-Father")));
        assert!(!subsumes(nf("Successful-Father"), nf("Father")));
        assert!(subsumes(nf("Father"), nf("Father")));
        assert!(!subsumes(nf("Father"), nf("Male")));
    }

    #[test]
    fn cardinality_and_role_conjunction_directions() {
        let tbox = tbox_from(
            "(defrelation R1 :primitive)\n\
             (defrelation R2 :primitive)\n\
             (defrelation Both (:and R1 R2))\n\
             (defconcept C (:primitive))\n\
             (defconcept TwoR1 (:at-least 2 R1))\n\
             (defconcept OneR1 (:at-least 1 R1))\n\
             (defconcept OneBoth (:at-least 1 Both))\n\
             (defconcept CapBoth (:at-most 1 Both))\n\
             (defconcept CapR1 (:at-most 1 R1))\n\
             (defconcept AllR1C (:all R1 C))\n\
             (defconcept AllBothC (:all Both C))",
        );
        let nf = |n: &str| &tbox.concept(&n.into()).unwrap().nf;
        // more required fillers of the same role is more specific
        assert!(subsumes(nf("OneR1"), nf("TwoR1")));
        assert!(!subsumes(nf("TwoR1"), nf("OneR1")));
        // fillers of an intersection role are fillers of each conjunct,
        // but not the other way around
        assert!(subsumes(nf("OneR1"), nf("OneBoth")));
        assert!(!subsumes(nf("OneBoth"), nf("OneR1")));
        assert!(!subsumes(nf("OneBoth"), nf("TwoR1")));
        // a cap on the big role caps the small one
        assert!(subsumes(nf("CapBoth"), nf("CapR1")));
        assert!(!subsumes(nf("CapR1"), nf("CapBoth")));
        // a value restriction on the big role restricts the small one
        assert!(subsumes(nf("AllBothC"), nf("AllR1C")));
        assert!(!subsumes(nf("AllR1C"), nf("AllBothC")));
    }

    #[test]
    fn at_least_on_conjoined_role_counts_for_parts() {
        let tbox = tbox_from(
            "(defrelation R1 :primitive)\n\
             (defrelation R2 :primitive)\n\
             (defconcept OneR1 (:at-least 1 R1))\n\
             (defconcept OneBoth (:at-least 1 (:and R1 R2)))",
        );
        let nf = |n: &str| &tbox.concept(&n.into()).unwrap().nf;
        assert!(subsumes(nf("OneR1"), nf("OneBoth")));
    }

    #[test]
    fn zero_cap_entails_any_value_restriction() {
        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept C (:primitive))\n\
             (defconcept Childless (:at-most 0 Child))\n\
             (defconcept Careful (:all Child C))",
        );
        let nf = |n: &str| &tbox.concept(&n.into()).unwrap().nf;
        assert!(subsumes(nf("Careful"), nf("Childless")));
    }

    #[test]
    fn empty_terminology_classifies_to_two_nodes() {
        let tax = classify(&TBox::new());
        assert_eq!(tax.nodes.len(), 2);
        assert_eq!(
            tax.edges(),
            BTreeSet::from([("*top*".to_string(), "*bottom*".to_string())])
        );
    }

    #[test]
    fn taxonomy_is_a_transitive_reduction() {
        let tbox = tbox_from(
            "(defconcept Male (:primitive))\n\
             (defconcept College-Graduate (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept Father (:and Male (:at-least 1 Child)))\n\
             (defconcept Successful-Father (:and Father (:all Child College-Graduate)))",
        );
        let tax = classify(&tbox);
        let edges = tax.edges();
        assert!(edges.contains(&("Father".into(), "Successful-Father".into())));
        assert!(edges.contains(&("Male".into(), "Father".into())));
        assert!(edges.contains(&("*top*".into(), "Male".into())));
        // the composed definition sits strictly below its parts
        assert!(!edges.contains(&("*top*".into(), "Father".into())));
        assert!(!edges.contains(&("Male".into(), "Successful-Father".into())));
        assert!(edges.contains(&("Successful-Father".into(), "*bottom*".into())));
    }

    #[test]
    fn mutually_subsuming_names_share_a_node() {
        let tbox = tbox_from(
            "(defconcept A (:primitive))\n\
             (defconcept B (:primitive))\n\
             (defconcept AB (:and A B))\n\
             (defconcept BA (:and B A))",
        );
        let tax = classify(&tbox);
        let node = tax
            .nodes
            .iter()
            .find(|n| n.labels.contains(&"AB".into()))
            .unwrap();
        assert!(node.labels.contains(&"BA".into()));
    }

    #[test]
    fn incoherent_names_collapse_into_bottom() {
        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept Odd (:and (:at-least 2 Child) (:at-most 1 Child)))",
        );
        let tax = classify(&tbox);
        assert!(tax.nodes[tax.bottom].labels.contains(&"Odd".into()));
        assert!(tax.render_tree().contains("*bottom* (= Odd)"));
    }
}
