from .version import __version__

from .errors import WatermarkError, NumericError, InfeasibleError, CapExceededError
from .hypothesis import Decision

from .empirical import (Alphabet, MemorylessSource, EmpiricalJoint, empirical_joint, entropy,
                        joint_entropy, conditional_entropy, mutual_information,
                        conditional_mutual_information, kl_divergence, log_prob_memoryless,
                        conditional_type_log_size, conditional_type_size_bounds,
                        enumerate_conditional_type)
from .detect_discrete import (Variant, DetectorConfig, EmbedConstraint, lambda_star_accepts,
                              universal_accepts, random_wm_accepts,
                              individual_covertext_accepts, false_positive_exact,
                              search_embedding, optimal_embed_discrete)
from .gaussian import (Embedder, EmbedderKind, EmbedStats, stats, emp_mutual_info_gauss,
                       differential_entropy, conditional_differential_entropy,
                       normalized_correlation, detect_mi, detect_corr, optimal_coefficients,
                       embed, embed_batch, objective_R, project_to_span)
from .exponents import (ExponentQuery, ExponentCurve, exponent_sign, exponent_improved_sign,
                        exponent_additive, psi_angles, cap_log_ratio, zero_exponent_lambda,
                        exponent_curve, exact_false_positive, log_sign_false_negative)
from .attacks import (MemorylessAttack, AttackBudget, ExchangeableWorstCase, output_marginal,
                      memoryless_attack_accepts, embed_memoryless_attack, wstar_prob,
                      wstar_table, inner_divergence, worstcase_accepts,
                      random_wm_worstcase_accepts, embed_worstcase, false_positive_table)
from .simkit import (SimConfig, SimResult, AwgnAttack, run_trials, estimate_exponent,
                     false_positive_check, wilson_interval)
