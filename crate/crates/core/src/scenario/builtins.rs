//! Built-in demonstration scenarios, stored as config text.

const THM1: &str = "\
[scenario]
name = thm1
[prior]
family = uniform
params = 0 1
[kernel]
type = triangle_rectangle
[conditioning]
points = 1 2
[checks]
run = fosd ruleout oracle kernel
[expect]
fosd_points = strict_dominates
lemma = not_precluded
corollary = none
";

const COR1: &str = "\
[scenario]
name = cor1
[prior]
family = uniform
params = 0 1
[kernel]
type = triangle_rectangle
[conditioning]
cutoffs = 1 2
signal = transformed
[checks]
run = curve fosd oracle
[expect]
reversal = true
curve = 0.5833333333333334 0.5
fosd_cutoffs = strict_dominates
";

const COR2_CONTINUOUS: &str = "\
[scenario]
name = cor2_continuous
[prior]
family = uniform
params = 0 1
[kernel]
type = three_piece
iota = 0.1
xi = 1
[conditioning]
points = 1 2
[checks]
run = fosd oracle kernel
[expect]
fosd_points = strict_dominates
";

const LEMMA_RULEOUT: &str = "\
[scenario]
name = lemma_ruleout
[prior]
family = uniform
params = 0 1
[kernel]
type = additive
noise = uniform 0 1
[conditioning]
points = 0.5 1.5
[checks]
run = ruleout fosd
[expect]
lemma = precluded
fosd_points = dominated incomparable
";

const COR3_RULEOUT: &str = "\
[scenario]
name = cor3_ruleout
[prior]
family = uniform
params = 0 1
[kernel]
type = additive
noise = uniform 0 0.5
[conditioning]
points = 0.25 0.5 0.75 1 1.25
[checks]
run = ruleout fosd
[expect]
lemma = precluded
corollary = corollary_i
fosd_points = dominated incomparable
";

const THM2_PARETO: &str = "\
[scenario]
name = thm2_pareto
[prior]
family = uniform
params = -1 0
[kernel]
type = additive
noise = pareto 2 1
[conditioning]
points = 1 1.5 2 3 5
[checks]
run = thm2 fosd oracle
[expect]
thm2 = strictly_decreasing
zmin = 1
z_derivative = positive
fosd_points = strict_dominates
";

const COR5_EXPONENTIAL: &str = "\
[scenario]
name = cor5_exponential
[prior]
family = uniform
params = -1 0
[kernel]
type = additive
noise = exponential 1
[conditioning]
points = 1 2 5
[checks]
run = thm2 fosd oracle
[expect]
thm2 = weakly_decreasing
zmin = 0
z_derivative = zero
fosd_points = equal
";

const TAX_MIXTURE: &str = "\
[scenario]
name = tax_mixture
[prior]
family = neg_exponential
params = 1
truncate = -30 0
[kernel]
type = evasion
noise = exponential 1
p = 0.3
[conditioning]
points = 0 0.5 1 2 5
band = left
[checks]
run = fosd oracle
fosd_pairs = first
[expect]
fosd_points = strict_dominates weak_dominates
";

const FOOTNOTE2: &str = "\
[scenario]
name = footnote2
[prior]
family = footnote_mixture
params = 0.05
[kernel]
type = triangle_rectangle
[conditioning]
cutoffs = 1 2
signal = transformed
[checks]
run = curve fosd ruleout
[expect]
reversal = true
fosd_cutoffs = weak_dominates dominated incomparable equal
corollary = corollary_i
";

const ALL: [(&str, &str); 9] = [
    ("thm1", THM1),
    ("cor1", COR1),
    ("cor2_continuous", COR2_CONTINUOUS),
    ("lemma_ruleout", LEMMA_RULEOUT),
    ("cor3_ruleout", COR3_RULEOUT),
    ("thm2_pareto", THM2_PARETO),
    ("cor5_exponential", COR5_EXPONENTIAL),
    ("tax_mixture", TAX_MIXTURE),
    ("footnote2", FOOTNOTE2),
];

pub fn list_builtins() -> Vec<&'static str> {
    ALL.iter().map(|(n, _)| *n).collect()
}

/// Config text of a built-in scenario.
pub fn builtin_config(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
