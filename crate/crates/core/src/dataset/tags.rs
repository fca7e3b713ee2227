//! Fixed tables mapping dataset-specific annotation tags onto
//! [`LightState`].

use crate::model::LightState;

/// What a raw dataset tag means for ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagMeaning {
    Light(LightState),
    /// The light is switched off; it carries no state and is dropped.
    Off,
}

pub const LISA_TAGS: &[(&str, LightState)] = &[
    ("stop", LightState::Stop),
    ("stopLeft", LightState::StopLeft),
    ("go", LightState::Go),
    ("goForward", LightState::Go),
    ("goLeft", LightState::GoLeft),
    ("warning", LightState::Warning),
    ("warningLeft", LightState::Warning),
];

pub const BOSCH_TAGS: &[(&str, TagMeaning)] = &[
    ("Red", TagMeaning::Light(LightState::Stop)),
    ("RedRight", TagMeaning::Light(LightState::Stop)),
    ("RedStraight", TagMeaning::Light(LightState::Stop)),
    ("RedLeft", TagMeaning::Light(LightState::StopLeft)),
    ("RedStraightLeft", TagMeaning::Light(LightState::StopLeft)),
    ("Green", TagMeaning::Light(LightState::Go)),
    ("GreenRight", TagMeaning::Light(LightState::Go)),
    ("GreenStraight", TagMeaning::Light(LightState::Go)),
    ("GreenStraightRight", TagMeaning::Light(LightState::Go)),
    ("GreenLeft", TagMeaning::Light(LightState::GoLeft)),
    ("GreenStraightLeft", TagMeaning::Light(LightState::GoLeft)),
    ("Yellow", TagMeaning::Light(LightState::Warning)),
    ("off", TagMeaning::Off),
];

pub fn lisa_state(tag: &str) -> Option<LightState> {
    LISA_TAGS
        .iter()
        .find(|(name, _)| *name == tag)
        .map(|&(_, state)| state)
}

pub fn bosch_meaning(label: &str) -> Option<TagMeaning> {
    BOSCH_TAGS
        .iter()
        .find(|(name, _)| *name == label)
        .map(|&(_, meaning)| meaning)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_state_is_reachable_from_both_datasets() {
        for state in LightState::ALL {
            assert!(LISA_TAGS.iter().any(|&(_, s)| s == state), "{state}");
            assert!(BOSCH_TAGS
                .iter()
                .any(|&(_, m)| m == TagMeaning::Light(state)));
        }
    }

    #[test]
    fn tables_have_no_duplicate_keys() {
        let mut lisa: Vec<_> = LISA_TAGS.iter().map(|(n, _)| *n).collect();
        lisa.sort_unstable();
        lisa.dedup();
        assert_eq!(lisa.len(), LISA_TAGS.len());
        let mut bosch: Vec<_> = BOSCH_TAGS.iter().map(|(n, _)| *n).collect();
        bosch.sort_unstable();
        bosch.dedup();
        assert_eq!(bosch.len(), BOSCH_TAGS.len());
    }

    #[test]
    fn lookups() {
        assert_eq!(lisa_state("goLeft"), Some(LightState::GoLeft));
        assert_eq!(lisa_state("purple"), None);
        assert_eq!(bosch_meaning("off"), Some(TagMeaning::Off));
        assert_eq!(
            bosch_meaning("GreenLeft"),
            Some(TagMeaning::Light(LightState::GoLeft))
        );
    }
}
