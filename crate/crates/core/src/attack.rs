// Copyright 2026 The stablepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Fixed-route attackers: every attacker sends one constant announcement per
//! neighbor, or nothing at all, for the whole run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{content_lines, parse_id, syntax, AsGraph, NodeId, ParseError};
use crate::policy::Route;
use crate::seed::hash_words;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("node {0} is not an attacker")]
    NotAttacker(NodeId),
    #[error("node {neighbor} is not a neighbor of attacker {attacker}")]
    NotNeighbor { attacker: NodeId, neighbor: NodeId },
    #[error(
        "announcement {0} must run from its attacker to the destination through no other attacker"
    )]
    BadAnnouncement(Route),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// What an attacker tells one neighbor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Announcement {
    /// A node sequence from the attacker to the destination. It need not be
    /// simple and its edges need not exist in the graph, but it names no other
    /// attacker.
    Path(Route),
    /// Never send anything.
    Silence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedRouteAttack {
    pub attacker: NodeId,
    announcements: BTreeMap<NodeId, Announcement>,
}

impl FixedRouteAttack {
    /// An attack that is silent towards every neighbor.
    pub fn silent(graph: &AsGraph, attacker: NodeId) -> Result<Self, AttackError> {
        if !graph.is_attacker(attacker) {
            return Err(AttackError::NotAttacker(attacker));
        }
        let announcements = graph
            .neighbors(attacker)
            .map_err(|_| AttackError::NotAttacker(attacker))?
            .into_iter()
            .map(|(n, _)| (n, Announcement::Silence))
            .collect();
        Ok(FixedRouteAttack {
            attacker,
            announcements,
        })
    }

    pub fn set(&mut self, neighbor: NodeId, announcement: Announcement) -> Result<(), AttackError> {
        let slot = self
            .announcements
            .get_mut(&neighbor)
            .ok_or(AttackError::NotNeighbor {
                attacker: self.attacker,
                neighbor,
            })?;
        if let Announcement::Path(r) = &announcement {
            if r.owner() != Some(self.attacker) {
                return Err(AttackError::BadAnnouncement(r.clone()));
            }
        }
        *slot = announcement;
        Ok(())
    }

    pub fn announcement_for(&self, neighbor: NodeId) -> Result<&Announcement, AttackError> {
        self.announcements
            .get(&neighbor)
            .ok_or(AttackError::NotNeighbor {
                attacker: self.attacker,
                neighbor,
            })
    }

    pub fn announcements(&self) -> &BTreeMap<NodeId, Announcement> {
        &self.announcements
    }

    /// Stable digest of the announcement map.
    pub fn fingerprint(&self) -> u64 {
        let mut words = vec![self.attacker.0 as u64];
        for (n, a) in &self.announcements {
            words.push(n.0 as u64);
            match a {
                Announcement::Silence => words.push(u64::MAX),
                Announcement::Path(r) => {
                    words.push(r.hops().len() as u64);
                    words.extend(r.hops().iter().map(|h| h.0 as u64));
                }
            }
        }
        hash_words(0xa77ac, words)
    }
}

/// Announces `(attacker, d)` to every neighbor.
pub fn prefix_hijack(attacker: NodeId, graph: &AsGraph) -> Result<FixedRouteAttack, AttackError> {
    let mut attack = FixedRouteAttack::silent(graph, attacker)?;
    let bogus = Route::new(vec![attacker, graph.destination()]);
    for ann in attack.announcements.values_mut() {
        *ann = Announcement::Path(bogus.clone());
    }
    Ok(attack)
}

/// The attacks of every attacker in a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSet {
    attacks: BTreeMap<NodeId, FixedRouteAttack>,
}

impl AttackSet {
    /// Every attacker of `graph` silent.
    pub fn silent(graph: &AsGraph) -> Self {
        let attacks = graph
            .attackers()
            .iter()
            .map(|a| {
                (
                    *a,
                    FixedRouteAttack::silent(graph, *a).expect("attacker of this graph"),
                )
            })
            .collect();
        AttackSet { attacks }
    }

    /// Every attacker of `graph` hijacks the prefix.
    pub fn hijack_all(graph: &AsGraph) -> Self {
        let attacks = graph
            .attackers()
            .iter()
            .map(|a| {
                (
                    *a,
                    prefix_hijack(*a, graph).expect("attacker of this graph"),
                )
            })
            .collect();
        AttackSet { attacks }
    }

    pub fn insert(&mut self, attack: FixedRouteAttack) {
        self.attacks.insert(attack.attacker, attack);
    }

    pub fn get(&self, attacker: NodeId) -> Option<&FixedRouteAttack> {
        self.attacks.get(&attacker)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FixedRouteAttack> {
        self.attacks.values()
    }

    /// Constant announcement of `attacker` towards `neighbor`; silence when
    /// nothing was configured.
    pub fn announcement(&self, attacker: NodeId, neighbor: NodeId) -> &Announcement {
        const SILENCE: Announcement = Announcement::Silence;
        self.attacks
            .get(&attacker)
            .and_then(|a| a.announcement_for(neighbor).ok())
            .unwrap_or(&SILENCE)
    }

    pub fn fingerprint(&self) -> u64 {
        hash_words(0xa5e7, self.attacks.values().map(|a| a.fingerprint()))
    }
}

/// Parses `attack <attacker> <neighbor> <seq>|silence` lines. Attackers of
/// `graph` without lines stay silent.
pub fn parse_attacks(graph: &AsGraph, text: &str) -> Result<AttackSet, AttackError> {
    let mut set = AttackSet::silent(graph);
    for (line, toks) in content_lines(text) {
        let ["attack", a, n, what] = toks.as_slice() else {
            return Err(syntax(line, format!("unrecognized line `{}`", toks.join(" "))).into());
        };
        let (a, n) = (parse_id(line, a)?, parse_id(line, n)?);
        let ann = if *what == "silence" {
            Announcement::Silence
        } else {
            let r: Route = what
                .parse()
                .map_err(|e: crate::policy::RouteParseError| syntax(line, e.to_string()))?;
            let stray = r.hops().iter().skip(1).any(|h| graph.is_attacker(*h));
            if r.owner() != Some(a) || r.last() != Some(graph.destination()) || stray {
                return Err(AttackError::BadAnnouncement(r));
            }
            Announcement::Path(r)
        };
        let attack = set.attacks.get_mut(&a).ok_or(AttackError::NotAttacker(a))?;
        attack.set(n, ann)?;
    }
    Ok(set)
}

/// Renders `attacks` in the attack file format.
pub fn write_attacks(attacks: &AttackSet) -> String {
    let mut out = String::new();
    for attack in attacks.iter() {
        for (n, ann) in attack.announcements() {
            match ann {
                Announcement::Silence => {
                    out.push_str(&format!("attack {} {n} silence\n", attack.attacker))
                }
                Announcement::Path(r) => {
                    out.push_str(&format!("attack {} {n} {r}\n", attack.attacker))
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_topology;

    fn gadget_graph() -> AsGraph {
        parse_topology(
            "dest 6\nnode 0 attacker\nnode 1\nnode 2\nnode 3\nnode 4\nnode 5\nnode 7 attacker\n\
             edge 1 6 plain\nedge 2 6 plain\nedge 3 6 plain\nedge 0 1 plain\nedge 0 2 plain\n\
             edge 0 3 plain\nedge 1 3 plain\nedge 2 1 plain\nedge 3 2 plain\nedge 0 4 plain\n\
             edge 4 5 plain\nedge 5 6 plain\n",
        )
        .unwrap()
    }

    #[test]
    fn hijack_announces_attacker_then_destination() {
        let g = gadget_graph();
        let attack = prefix_hijack(NodeId(0), &g).unwrap();
        let expected = Announcement::Path(Route::from_ids(&[0, 6]));
        for n in [1, 2, 3, 4] {
            assert_eq!(attack.announcement_for(NodeId(n)).unwrap(), &expected);
        }
        assert_eq!(attack.announcements().len(), 4);
        assert!(matches!(
            attack.announcement_for(NodeId(5)),
            Err(AttackError::NotNeighbor { .. })
        ));
        assert!(matches!(
            prefix_hijack(NodeId(1), &g),
            Err(AttackError::NotAttacker(_))
        ));
    }

    #[test]
    fn isolated_attacker_has_no_announcements() {
        let g = gadget_graph();
        assert!(prefix_hijack(NodeId(7), &g)
            .unwrap()
            .announcements()
            .is_empty());
    }

    #[test]
    fn heterogeneous_file_round_trip() {
        let g = gadget_graph();
        let text = "attack 0 1 0,4,6\nattack 0 2 0,6\nattack 0 3 silence\n";
        let set = parse_attacks(&g, text).unwrap();
        let a = set.get(NodeId(0)).unwrap();
        assert_eq!(
            a.announcement_for(NodeId(1)).unwrap(),
            &Announcement::Path(Route::from_ids(&[0, 4, 6]))
        );
        assert_eq!(
            a.announcement_for(NodeId(2)).unwrap(),
            &Announcement::Path(Route::from_ids(&[0, 6]))
        );
        assert_eq!(
            a.announcement_for(NodeId(3)).unwrap(),
            &Announcement::Silence
        );
        assert_eq!(
            a.announcement_for(NodeId(4)).unwrap(),
            &Announcement::Silence
        );
        let again = parse_attacks(&g, &write_attacks(&set)).unwrap();
        assert_eq!(again, set);
        assert_eq!(again.fingerprint(), set.fingerprint());
    }

    #[test]
    fn file_errors() {
        let g = gadget_graph();
        assert!(matches!(
            parse_attacks(&g, "attack 1 2 1,6\n"),
            Err(AttackError::NotAttacker(_))
        ));
        assert!(matches!(
            parse_attacks(&g, "attack 0 5 0,6\n"),
            Err(AttackError::NotNeighbor { .. })
        ));
        assert!(matches!(
            parse_attacks(&g, "attack 0 1 0,4\n"),
            Err(AttackError::BadAnnouncement(_))
        ));
        assert!(matches!(
            parse_attacks(&g, "attack 0 1\n"),
            Err(AttackError::Parse(_))
        ));
        assert!(matches!(
            parse_attacks(&g, "attack 0 1 1,6\n"),
            Err(AttackError::BadAnnouncement(_))
        ));
    }
}
