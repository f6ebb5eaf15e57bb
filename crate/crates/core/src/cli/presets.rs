//! Named parameter sets (`fig3a`, `fig7`, ...) as key/value overrides.

/// One curve set of a preset: a label and the settings that differ from the
/// defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Panel {
    pub label: &'static str,
    pub settings: Vec<(&'static str, &'static str)>,
}

const RESONANCE: [(&str, &str); 6] = [("a", "1"), ("b", "1"), ("d", "5"), ("l", "5"), ("axis", "E"), ("span", "1")];
const FIELD_WIDTH: [(&str, &str); 6] = [("a", "1"), ("d", "5"), ("l", "3"), ("u", "0.05"), ("axis", "E"), ("span", "1")];
const TWO_CHANNEL: [(&str, &str); 6] = [("a", "1"), ("b", "1"), ("d", "7"), ("l", "5"), ("axis", "E"), ("span", "1")];
const SMALL_PARTICLE: [(&str, &str); 5] = [("a", "1"), ("d", "0.05"), ("l", "0.05"), ("u", "0.05"), ("axis", "E")];

fn panel(label: &'static str, base: &[(&'static str, &'static str)], extra: &[(&'static str, &'static str)]) -> Panel {
    let mut settings = base.to_vec();
    settings.extend_from_slice(extra);
    Panel { label, settings }
}

fn panels(name: &str) -> Option<Vec<Panel>> {
    // lowest resonance sits near (E - ε1)/V0 = 0.12
    let zoom = [("start", "0.09"), ("span", "0.05")];
    let p = match name {
        "fig3a" => vec![panel("a", &RESONANCE, &[("u", "0")])],
        "fig3b" => vec![panel("b", &RESONANCE, &[("u", "0.05")])],
        "fig3c" => vec![panel("c", &RESONANCE, &[("u", "0.15")])],
        "fig3d" => vec![panel("d", &RESONANCE, &[("u", "0.05"), zoom[0], zoom[1]])],
        "fig4a" => vec![panel("a", &RESONANCE, &[("u", "0.001"), zoom[0], zoom[1]])],
        "fig4b" => vec![panel("b", &RESONANCE, &[("u", "0.005"), zoom[0], zoom[1]])],
        "fig5a" => vec![panel("a", &FIELD_WIDTH, &[("b", "1")])],
        "fig5b" => vec![panel("b", &FIELD_WIDTH, &[("b", "3.5")])],
        "fig5c" => vec![panel("c", &FIELD_WIDTH, &[("b", "8")])],
        "fig5d" => vec![panel("d", &FIELD_WIDTH, &[("b", "15")])],
        "fig5e" => vec![panel("e", &FIELD_WIDTH, &[("b", "100")])],
        "fig5f" => vec![panel("f", &FIELD_WIDTH, &[("b", "200")])],
        "fig6a" => vec![panel("a", &TWO_CHANNEL, &[("u", "0.05")])],
        "fig6b" => vec![panel("b", &TWO_CHANNEL, &[("u", "0.15")])],
        "fig6c" => vec![panel("c", &TWO_CHANNEL, &[("u", "0.05"), ("incident-channel", "2")])],
        "fig6d" => vec![panel("d", &TWO_CHANNEL, &[("u", "0.15"), ("incident-channel", "2")])],
        "compact-a" => vec![panel("a", &SMALL_PARTICLE, &[("b", "1"), ("d", "0.5"), ("l", "0.5"), ("span", "1")])],
        "compact-b" => vec![panel("b", &SMALL_PARTICLE, &[("b", "1"), ("span", "1")])],
        "fig7a" => vec![panel("a", &SMALL_PARTICLE, &[("b", "100"), ("span", "1")])],
        "fig7b" => vec![panel("b", &SMALL_PARTICLE, &[("b", "200"), ("span", "1")])],
        "fig8a" => vec![panel("a", &SMALL_PARTICLE, &[("a", "0.3"), ("b", "100"), ("span", "1")])],
        "fig8b" => vec![panel("b", &SMALL_PARTICLE, &[("a", "0.3"), ("b", "100"), ("span", "0.1")])],
        "fig3" | "fig4" | "fig5" | "fig6" | "fig7" | "fig8" | "compact" => {
            let subs: &[&str] = match name {
                "fig3" => &["a", "b", "c", "d"],
                "fig4" | "fig7" | "fig8" => &["a", "b"],
                "fig5" => &["a", "b", "c", "d", "e", "f"],
                "fig6" => &["a", "b", "c", "d"],
                _ => &["a", "b"],
            };
            let sep = if name == "compact" { "-" } else { "" };
            return Some(subs.iter().flat_map(|s| panels(&format!("{name}{sep}{s}")).unwrap()).collect());
        }
        _ => return None,
    };
    Some(p)
}

pub const PRESET_NAMES: &[&str] = &[
    "fig3", "fig3a", "fig3b", "fig3c", "fig3d", "fig4", "fig4a", "fig4b", "fig5", "fig5a", "fig5b", "fig5c", "fig5d",
    "fig5e", "fig5f", "fig6", "fig6a", "fig6b", "fig6c", "fig6d", "compact", "compact-a", "compact-b", "fig7", "fig7a",
    "fig7b", "fig8", "fig8a", "fig8b",
];

/// Panels of a named preset, `None` for an unknown name.
pub fn preset(name: &str) -> Option<Vec<Panel>> {
    panels(name)
}
