//! Syscall policies: the naive whitelist baseline, policies read off run
//! logs, unions over run batches, and permit/deny evaluation.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::runlog::RunLog;
use crate::trace::SessionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyProvenance {
    Naive,
    TwocellSingleRun,
    TwocellUnion,
}

/// A permit-set over syscall numbers with per-syscall frequencies: observed
/// counts for naive policies, response counts for single-run policies, and
/// inclusion counts (how many constituent policies permit the syscall) for
/// unions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyscallPolicy {
    pub permitted: BTreeSet<u32>,
    pub provenance: PolicyProvenance,
    pub per_syscall_frequency: BTreeMap<u32, u64>,
}

impl SyscallPolicy {
    pub fn permits(&self, syscall: u32) -> bool {
        self.permitted.contains(&syscall)
    }
}

/// Whitelist of every syscall observed in the given (normal-usage) sessions.
pub fn naive_policy(traces: &[SessionTrace]) -> SyscallPolicy {
    let mut frequency: BTreeMap<u32, u64> = BTreeMap::new();
    for trace in traces {
        for (_, syscall) in trace.antigen_events() {
            *frequency.entry(syscall).or_insert(0) += 1;
        }
    }
    SyscallPolicy {
        permitted: frequency.keys().copied().collect(),
        provenance: PolicyProvenance::Naive,
        per_syscall_frequency: frequency,
    }
}

/// Policy permitting exactly the syscalls responded to in a training run.
pub fn twocell_policy(log: &RunLog) -> SyscallPolicy {
    let mut frequency: BTreeMap<u32, u64> = BTreeMap::new();
    for (_, _, syscall) in log.responses() {
        *frequency.entry(syscall).or_insert(0) += 1;
    }
    SyscallPolicy {
        permitted: frequency.keys().copied().collect(),
        provenance: PolicyProvenance::TwocellSingleRun,
        per_syscall_frequency: frequency,
    }
}

/// Permits anything permitted by any constituent policy. Frequencies count
/// the policies containing each syscall.
pub fn union_policies(policies: &[SyscallPolicy]) -> SyscallPolicy {
    let mut frequency: BTreeMap<u32, u64> = BTreeMap::new();
    for policy in policies {
        for &syscall in &policy.permitted {
            *frequency.entry(syscall).or_insert(0) += 1;
        }
    }
    SyscallPolicy {
        permitted: frequency.keys().copied().collect(),
        provenance: PolicyProvenance::TwocellUnion,
        per_syscall_frequency: frequency,
    }
}

/// Permit/deny outcome of applying a policy to a session. On an empty
/// session the percentages report a vacuous 100% permitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvaluation {
    pub permitted_count: u64,
    pub denied_count: u64,
    pub permitted_pct: f64,
    pub denied_pct: f64,
}

impl PolicyEvaluation {
    /// Integer percentages for report tables; the pair always sums to 100.
    pub fn rounded(&self) -> (u32, u32) {
        let permitted = libm::round(self.permitted_pct) as u32;
        (permitted, 100 - permitted)
    }
}

pub fn evaluate_policy(policy: &SyscallPolicy, trace: &SessionTrace) -> PolicyEvaluation {
    let mut permitted = 0u64;
    let mut denied = 0u64;
    for (_, syscall) in trace.antigen_events() {
        if policy.permits(syscall) {
            permitted += 1;
        } else {
            denied += 1;
        }
    }
    let total = permitted + denied;
    let (permitted_pct, denied_pct) = if total == 0 {
        (100.0, 0.0)
    } else {
        (
            100.0 * permitted as f64 / total as f64,
            100.0 * denied as f64 / total as f64,
        )
    };
    PolicyEvaluation {
        permitted_count: permitted,
        denied_count: denied,
        permitted_pct,
        denied_pct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runlog::LogEvent;
    use crate::trace::parse_trace;
    use alloc::vec;

    fn trace_of(syscalls: &[u32]) -> SessionTrace {
        let mut text = alloc::string::String::from("#session t 10\n");
        for (i, s) in syscalls.iter().enumerate() {
            text.push_str(&alloc::format!("A {} {}\n", i * 1000, s));
        }
        parse_trace(&text).unwrap()
    }

    fn log_of(responses: &[(u32, u64)]) -> RunLog {
        let mut log = RunLog::default();
        for &(syscall, count) in responses {
            for i in 0..count {
                log.events.push(LogEvent::Response {
                    at: i * 100,
                    cell_id: 50,
                    syscall,
                });
                log.stats.responses += 1;
            }
        }
        log
    }

    #[test]
    fn naive_policy_unions_observed_syscalls() {
        let policy = naive_policy(&[trace_of(&[3, 5, 6, 5])]);
        assert_eq!(policy.permitted, BTreeSet::from([3, 5, 6]));
        assert_eq!(policy.per_syscall_frequency[&5], 2);
        assert_eq!(policy.provenance, PolicyProvenance::Naive);
    }

    #[test]
    fn naive_policy_of_nothing_is_empty() {
        let policy = naive_policy(&[]);
        assert!(policy.permitted.is_empty());
    }

    #[test]
    fn twocell_policy_counts_responses() {
        let log = log_of(&[(6, 34), (5, 22)]);
        let policy = twocell_policy(&log);
        assert_eq!(policy.permitted, BTreeSet::from([5, 6]));
        assert_eq!(policy.per_syscall_frequency[&5], 22);
        assert_eq!(policy.per_syscall_frequency[&6], 34);
        assert!(policy.per_syscall_frequency.values().all(|&n| n >= 1));
    }

    #[test]
    fn empty_log_gives_empty_policy() {
        let policy = twocell_policy(&RunLog::default());
        assert!(policy.permitted.is_empty());
        assert!(policy.per_syscall_frequency.is_empty());
    }

    #[test]
    fn union_counts_containing_policies() {
        let a = twocell_policy(&log_of(&[(5, 2), (6, 1)]));
        let b = twocell_policy(&log_of(&[(6, 4), (9, 1)]));
        let u = union_policies(&[a.clone(), b]);
        assert_eq!(u.permitted, BTreeSet::from([5, 6, 9]));
        assert_eq!(u.per_syscall_frequency[&5], 1);
        assert_eq!(u.per_syscall_frequency[&6], 2);
        assert_eq!(u.per_syscall_frequency[&9], 1);

        let twice = union_policies(&[a.clone(), a.clone()]);
        assert_eq!(twice.permitted, a.permitted);
    }

    #[test]
    fn evaluate_splits_counts_exactly() {
        let policy = twocell_policy(&log_of(&[(6, 1)]));
        let eval = evaluate_policy(&policy, &trace_of(&[6, 6, 5, 9]));
        assert_eq!(eval.permitted_count, 2);
        assert_eq!(eval.denied_count, 2);
        assert_eq!(eval.rounded(), (50, 50));
    }

    #[test]
    fn subset_trace_is_fully_permitted() {
        let policy = naive_policy(&[trace_of(&[3, 5, 6])]);
        let eval = evaluate_policy(&policy, &trace_of(&[5, 5, 3]));
        assert_eq!(eval.rounded(), (100, 0));
        assert_eq!(eval.denied_count, 0);
    }

    #[test]
    fn rounded_percentages_always_sum_to_100() {
        let policy = naive_policy(&[trace_of(&[1])]);
        for denied in 0..12u32 {
            let mut syscalls = vec![1u32; 12 - denied as usize];
            syscalls.extend(vec![999u32; denied as usize]);
            let eval = evaluate_policy(&policy, &trace_of(&syscalls));
            let (p, d) = eval.rounded();
            assert_eq!(p + d, 100);
            assert_eq!(
                eval.permitted_count + eval.denied_count,
                syscalls.len() as u64
            );
        }
    }
}
