//! Per-benchmark recipes: directed vector sets, stimulus shapes, mining
//! parameters, and campaign composition.

use crate::assertgen::VulnClass;
use crate::frontend::ast::BinOp;
use crate::mutate::{CampaignSpec, MutationOperator, OperatorDraw, ParamPool, SiteFilter};
use crate::sim::{load_vectors, InputMode, StimulusSpec, TestVectorSet};

use super::corpus;

/// One directed vector set plus its annotations.
#[derive(Debug, Clone)]
pub struct DirectedSet {
    pub set: TestVectorSet,
    /// Deliberately drives a rare trigger; excluded from golden
    /// cleanliness checks.
    pub trigger: bool,
}

#[derive(Debug, Clone)]
pub struct MiningRecipe {
    pub cycles: usize,
    pub stimulus: StimulusSpec,
    pub outputs: Vec<String>,
    pub max_antecedent: usize,
    pub min_support: usize,
}

/// How a fixture's ten vulnerable instances come to be.
#[derive(Debug, Clone)]
pub enum CampaignKind {
    /// Seeded mutation campaign.
    Mutants(CampaignSpec),
    /// No mutants: each directed trigger set is one run on the golden
    /// design (the design is treated as suspect by itself).
    DirectedRuns { class: VulnClass },
}

#[derive(Debug, Clone)]
pub struct BenchmarkFixture {
    pub name: &'static str,
    pub source: &'static str,
    pub origin: &'static str,
    pub top: &'static str,
    pub config: &'static str,
    pub directed: Vec<DirectedSet>,
    /// Seeded random stimulus used during detection runs.
    pub detection_random: Option<(usize, StimulusSpec)>,
    pub mining: MiningRecipe,
    pub campaign: CampaignKind,
    /// Classes whose assertions are expected to fire on the golden
    /// design (a design treated as buggy by itself).
    pub expected_fire: Vec<VulnClass>,
}

fn directed(name: &str, text: &str, trigger: bool) -> DirectedSet {
    directed_armed(name, text, trigger, 0)
}

fn directed_armed(name: &str, text: &str, trigger: bool, arm: usize) -> DirectedSet {
    let mut set = load_vectors(text, name).unwrap_or_else(|e| panic!("{name}: {e}"));
    set.trigger_test = trigger;
    set.arm_cycle = arm;
    DirectedSet { set, trigger }
}

pub fn fixture(name: &str) -> Option<BenchmarkFixture> {
    let (source, origin, top) = corpus::golden_source(name)?;
    let config = corpus::config_text(name)?;
    let f = match name {
        "arbiter" => BenchmarkFixture {
            name: "arbiter",
            source,
            origin,
            top,
            config,
            directed: vec![directed(
                "arbiter/directed",
                corpus::ARBITER_DIRECTED,
                false,
            )],
            detection_random: Some((1000, StimulusSpec::reset(2))),
            mining: MiningRecipe {
                cycles: 10_000,
                stimulus: StimulusSpec::reset(2),
                outputs: vec!["gnt1".into(), "gnt2".into()],
                max_antecedent: 2,
                min_support: 10,
            },
            campaign: CampaignKind::Mutants(CampaignSpec {
                draws: vec![OperatorDraw::uniform(MutationOperator::InvertSignal, 10)],
                witness_cycles: 1000,
                witness_stimulus: StimulusSpec::reset(2),
                witness_directed: Vec::new(),
            }),
            expected_fire: Vec::new(),
        },
        "mem" => {
            let witness_stim = StimulusSpec::reset(0)
                .with("address", InputMode::RandomBits(12));
            let detect_stim = StimulusSpec::reset(0)
                .with("address", InputMode::RandomBits(20))
                .with("in", InputMode::Const(0));
            let mine_stim = StimulusSpec::reset(4)
                .with("address", InputMode::RandomBits(13));
            BenchmarkFixture {
                name: "mem",
                source,
                origin,
                top,
                config,
                directed: vec![
                    directed("mem/privilege", corpus::MEM_PRIVILEGE_VEC, false),
                    directed("mem/leak", corpus::MEM_LEAK_VEC, false),
                    directed("mem/oob", corpus::MEM_OOB_VEC, false),
                ],
                detection_random: Some((1000, detect_stim)),
                mining: MiningRecipe {
                    cycles: 10_000,
                    stimulus: mine_stim,
                    outputs: vec!["out".into()],
                    max_antecedent: 2,
                    min_support: 10,
                },
                campaign: CampaignKind::Mutants(CampaignSpec {
                    draws: vec![
                        OperatorDraw {
                            operator: MutationOperator::RemoveGuard,
                            quota: 1,
                            filter: SiteFilter::WholeGuard,
                            params: ParamPool::None,
                        },
                        OperatorDraw {
                            operator: MutationOperator::LeakWire,
                            quota: 5,
                            filter: SiteFilter::All,
                            params: ParamPool::LeakAddresses(vec![2048, 2049, 2050, 2051, 2052]),
                        },
                        OperatorDraw {
                            operator: MutationOperator::InvertSignal,
                            quota: 2,
                            filter: SiteFilter::DescriptionContains("`address`".into()),
                            params: ParamPool::None,
                        },
                        OperatorDraw {
                            operator: MutationOperator::SwapOperator,
                            quota: 2,
                            filter: SiteFilter::SpanSlice("address >= 1024".into()),
                            params: ParamPool::SwapTo(vec![BinOp::Lt, BinOp::Le]),
                        },
                    ],
                    witness_cycles: 1000,
                    witness_stimulus: witness_stim,
                    witness_directed: vec![
                        load_vectors(corpus::MEM_PRIVILEGE_VEC, "mem/privilege").unwrap(),
                        load_vectors(corpus::MEM_LEAK_VEC, "mem/leak").unwrap(),
                        load_vectors(corpus::MEM_OOB_VEC, "mem/oob").unwrap(),
                    ],
                }),
                expected_fire: Vec::new(),
            }
        }
        "gng" => BenchmarkFixture {
            name: "gng",
            source,
            origin,
            top,
            config,
            directed: corpus::GNG_TRIGGERS
                .iter()
                .enumerate()
                // Armed after the two-stage pipeline has filled.
                .map(|(i, text)| directed_armed(&format!("gng/trigger{i}"), text, true, 2))
                .collect(),
            detection_random: Some((1000, StimulusSpec::reset(2))),
            mining: MiningRecipe {
                cycles: 10_000,
                stimulus: StimulusSpec::reset(4).with("rstn", InputMode::Const(1)),
                outputs: vec!["valid_out".into(), "data_out".into()],
                max_antecedent: 2,
                min_support: 10,
            },
            campaign: CampaignKind::DirectedRuns {
                class: VulnClass::NumericExceptions,
            },
            expected_fire: vec![VulnClass::NumericExceptions],
        },
        "aes" => BenchmarkFixture {
            name: "aes",
            source,
            origin,
            top,
            config,
            directed: vec![
                directed("aes/jtag", corpus::AES_JTAG_VEC, false),
                directed("aes/triggers", corpus::AES_TRIGGERS_VEC, true),
            ],
            detection_random: Some((
                1000,
                StimulusSpec::default().with("JTAG", InputMode::Const(0)),
            )),
            mining: MiningRecipe {
                cycles: 10_000,
                stimulus: StimulusSpec::reset(64),
                outputs: vec!["out".into(), "JTAG_out".into()],
                max_antecedent: 2,
                min_support: 10,
            },
            campaign: CampaignKind::Mutants(CampaignSpec {
                draws: vec![
                    OperatorDraw {
                        operator: MutationOperator::BypassCheck,
                        quota: 1,
                        filter: SiteFilter::SpanSlice("JTAG".into()),
                        params: ParamPool::None,
                    },
                    OperatorDraw {
                        operator: MutationOperator::InsertTrojan,
                        quota: 9,
                        filter: SiteFilter::All,
                        params: ParamPool::TrojanMask(0xdeadbeef),
                    },
                ],
                witness_cycles: 1000,
                witness_stimulus: StimulusSpec::default(),
                witness_directed: vec![
                    load_vectors(corpus::AES_TRIGGERS_VEC, "aes/triggers").unwrap()
                ],
            }),
            expected_fire: Vec::new(),
        },
        "usb_lite" => BenchmarkFixture {
            name: "usb_lite",
            source,
            origin,
            top,
            config,
            directed: vec![
                directed("usb_lite/families", corpus::USB_FAMILIES_VEC, false),
                directed("usb_lite/fsm", corpus::USB_FSM_VEC, false),
            ],
            detection_random: Some((1000, StimulusSpec::reset(2))),
            mining: MiningRecipe {
                cycles: 10_000,
                stimulus: StimulusSpec::reset(2),
                outputs: vec!["tx_data".into(), "busy".into()],
                max_antecedent: 2,
                min_support: 10,
            },
            campaign: CampaignKind::Mutants(CampaignSpec {
                draws: vec![
                    OperatorDraw {
                        operator: MutationOperator::MisassignConstant,
                        quota: 8,
                        filter: SiteFilter::All,
                        params: ParamPool::Misassign(vec![
                            (0xe1, 0xc3),
                            (0x69, 0x4b),
                            (0xa5, 0xd2),
                            (0x2d, 0x5a),
                            (0xd2, 0xc3),
                            (0x5a, 0x4b),
                            (0xc3, 0xd2),
                            (0x4b, 0x5a),
                        ]),
                    },
                    OperatorDraw {
                        operator: MutationOperator::SwapOperator,
                        quota: 2,
                        filter: SiteFilter::SpanSlice("send & ~abort".into()),
                        params: ParamPool::SwapTo(vec![BinOp::Or, BinOp::Xor]),
                    },
                ],
                witness_cycles: 1000,
                witness_stimulus: StimulusSpec::reset(2),
                witness_directed: vec![
                    load_vectors(corpus::USB_FAMILIES_VEC, "usb_lite/families").unwrap()
                ],
            }),
            expected_fire: Vec::new(),
        },
        _ => return None,
    };
    Some(f)
}
