"""Rule learning (FOIL, RIPPER, CART rules) with an explainable voting ensemble."""

from .data import AttributeSchema, Dataset, Instance, load_csv, split
from .decider import GbtDecider, OracleDecider, TreeDecider
from .foil import FoilLearner, foil_learn
from .kernels import BACKEND
from .metrics import EvalReport, evaluate
from .preprocess import Recipe, TransformSpec, apply_recipe, fit_recipe, load_recipe
from .ripper import RipperLearner
from .ruleio import parse_rules, serialize_rules
from .rules import (Literal, LearnerOutput, MultiClassRuleModel, Rule, RuleSet, match_fraction,
                    multiclass_predict, predict_dataset)
from .tree import TreeLearner, train_tree, tree_to_rules
from .voting import VotingConfig, VotingResult, run_ensemble, vote

__version__ = "0.1.0"
