//! Canonical Xapi text for parsed sentences.
//!
//! `parse(print_canonical(parse(s)))` is structurally equal to `parse(s)`;
//! the round-trip property is part of the acceptance suite.

use crate::ast::{
    Article, ClausePayload, ClauseSentence, MacroMember, MacroSpec, ParsedSentence, ReferenceExpr,
    ThusMarker,
};

/// Render a sentence in canonical form: single spaces, `a`/`an` chosen by
/// the following word, sentence-initial articles capitalized.
pub fn print_canonical(sentence: &ParsedSentence) -> String {
    match sentence {
        ParsedSentence::Clause(clause) => {
            let mut out = clause_text(clause, true);
            out.push('.');
            out
        }
        ParsedSentence::SceneMacro(spec) => macro_text(spec),
        ParsedSentence::MacroRow(members) => member_list_text(members),
    }
}

fn clause_text(clause: &ClauseSentence, capitalize: bool) -> String {
    let mut out = reference_text(&clause.subject, capitalize);
    out.push_str(" / ");
    if let Some(marker) = &clause.thus {
        out.push_str("thus ");
        if let ThusMarker::Labeled(label) = marker {
            out.push('#');
            out.push_str(label);
            out.push(' ');
        }
    }
    if clause.in_summary {
        out.push_str("in-summary ");
    }
    out.push_str(&clause.verb);
    if let Some(label) = &clause.verb_label {
        out.push_str(" #");
        out.push_str(label);
    }
    match &clause.payload {
        ClausePayload::None => {}
        ClausePayload::Adjectives(words) => {
            out.push_str(" / ");
            out.push_str(&words.join(" "));
        }
        ClausePayload::Object(object) => {
            out.push_str(" / ");
            out.push_str(&reference_text(object, false));
        }
        ClausePayload::Quote { scene_label, inner } => {
            out.push_str(" in #");
            out.push_str(scene_label);
            out.push_str(" // ");
            match inner.as_ref() {
                ParsedSentence::Clause(inner_clause) => {
                    out.push_str(&clause_text(inner_clause, true))
                }
                other => out.push_str(&print_canonical(other)),
            }
        }
    }
    out
}

/// Render a reference alone, e.g. for error messages.
pub fn print_reference(reference: &ReferenceExpr) -> String {
    reference_text(reference, false)
}

fn reference_text(reference: &ReferenceExpr, capitalize: bool) -> String {
    if reference.is_group() {
        let mut parts = reference.group_parts.iter();
        let mut out = reference_text(parts.next().unwrap(), capitalize);
        for part in parts {
            out.push_str(" + ");
            out.push_str(&reference_text(part, false));
        }
        return out;
    }
    if reference.is_scene_ref {
        let mut out = String::from(if capitalize { "Scene" } else { "scene" });
        if let Some(label) = &reference.scene_label {
            out.push_str(" #");
            out.push_str(label);
        }
        return out;
    }
    if let Some(text) = &reference.is_text_literal {
        return format!("text \"{text}\"");
    }
    if let Some(pronoun) = &reference.pronoun {
        return pronoun.clone();
    }

    let mut pieces: Vec<String> = Vec::new();
    let first_sound = reference
        .attributes
        .first()
        .map(String::as_str)
        .or(reference.proper_name.as_deref())
        .unwrap_or_default();
    match reference.article {
        Article::Indefinite => {
            let an = first_sound
                .chars()
                .next()
                .map(|c| "aeiouAEIOU".contains(c))
                .unwrap_or(false);
            let word = match (an, capitalize) {
                (true, true) => "An",
                (true, false) => "an",
                (false, true) => "A",
                (false, false) => "a",
            };
            pieces.push(word.to_string());
        }
        Article::Definite => {
            pieces.push(if capitalize { "The" } else { "the" }.to_string());
        }
        Article::None => {}
    }
    pieces.extend(reference.attributes.iter().cloned());
    if let Some(name) = &reference.proper_name {
        pieces.push(format!("\"{name}\""));
    }
    let mut out = pieces.join(" ");
    if let Some((word, target)) = &reference.relation_path {
        out.push_str(&format!(" -- {word} -- "));
        out.push_str(&reference_text(target, false));
    }
    if let Some(scene) = &reference.scene_qualifier {
        out.push_str(&format!(" -- in -- \"{scene}\""));
    }
    out
}

fn macro_text(spec: &MacroSpec) -> String {
    let mut out = format!("${} #{}", spec.kind.head(), spec.scene_label);
    if spec.scene_relation.is_none() && spec.members.is_empty() {
        return out;
    }
    out.push_str(", ");
    out.push_str(spec.scene_relation.as_deref().unwrap_or("none"));
    if !spec.members.is_empty() {
        out.push_str(", ");
        out.push_str(&member_list_text(&spec.members));
    }
    out
}

fn member_list_text(members: &[MacroMember]) -> String {
    members.iter().map(member_text).collect::<Vec<_>>().join(", ")
}

fn member_text(member: &MacroMember) -> String {
    let spec_text = |attrs: &[String], name: &Option<String>| {
        let mut pieces: Vec<String> = attrs.to_vec();
        if let Some(name) = name {
            pieces.push(format!("\"{name}\""));
        }
        pieces.join(" ")
    };
    match &member.source {
        Some((attrs, name)) => format!(
            "{} -> {}",
            spec_text(attrs, name),
            spec_text(&member.attributes, &member.proper_name)
        ),
        None => spec_text(&member.attributes, &member.proper_name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::parser::parse_sentence_text;

    fn roundtrip(text: &str) -> String {
        let lex = Lexicon::with_defaults();
        let parsed = parse_sentence_text(text, &lex).unwrap();
        let printed = print_canonical(&parsed);
        let reparsed = parse_sentence_text(&printed, &lex).unwrap();
        assert_eq!(parsed, reparsed, "round-trip mismatch for {text:?}");
        printed
    }

    #[test]
    fn normalizes_whitespace() {
        assert_eq!(roundtrip("An   apple/exists ."), "An apple / exists.");
    }

    #[test]
    fn labeled_thus() {
        assert_eq!(
            roundtrip("\"JayLeno\" / thus #A jokes."),
            "\"JayLeno\" / thus #A jokes."
        );
    }

    #[test]
    fn macro_row_canonical_form() {
        assert_eq!(
            roundtrip(
                "$NewScene #Attempt, fictional-future, man \"John\" -> man \"John\", cat -> cat, box -> box"
            ),
            "$NewScene #Attempt, fictional-future, man \"John\" -> man \"John\", cat -> cat, box -> box"
        );
    }

    #[test]
    fn article_choice_follows_first_word() {
        assert_eq!(roundtrip("a apple / exists."), "An apple / exists.");
        assert_eq!(roundtrip("AN SHIELD / EXISTS.".to_lowercase().as_str()), "A shield / exists.");
    }

    #[test]
    fn quote_and_path_forms() {
        assert_eq!(
            roundtrip("\"Me\" / sees in #Television // \"BradPitt\" / laughs."),
            "\"Me\" / sees in #Television // \"BradPitt\" / laughs."
        );
        assert_eq!(
            roundtrip("The shield -- of -- \"Achilles\" / is-a / big."),
            "The shield -- of -- \"Achilles\" / is-a / big."
        );
        assert_eq!(
            roundtrip("The kitchen / is-identical / the kitchen -- in -- \"plan\"."),
            "The kitchen / is-identical / the kitchen -- in -- \"plan\"."
        );
    }

    #[test]
    fn text_literals_and_groups() {
        assert_eq!(
            roundtrip("\"Caesar\" / utters / text \"Ave!\"."),
            "\"Caesar\" / utters / text \"Ave!\"."
        );
        assert_eq!(
            roundtrip("\"Caesar\" + \"Cicero\" / in-summary meet-and-greet-each-other."),
            "\"Caesar\" + \"Cicero\" / in-summary meet-and-greet-each-other."
        );
    }

    #[test]
    fn scene_sentences_print_with_capital_scene() {
        assert_eq!(
            roundtrip("scene #yesterday / is-past-of / scene #current."),
            "Scene #yesterday / is-past-of / scene #current."
        );
        assert_eq!(
            roundtrip("Scene / clone-scene / scene #Attempt."),
            "Scene / clone-scene / scene #Attempt."
        );
    }
}
