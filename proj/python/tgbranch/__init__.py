# Copyright 2026 The tgbranch authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Branch-and-bound MILP solving with learned branching policies."""

from tgbranch._tgbranch import (
    CANDIDATE_FEATURE_DIM,
    FEATURE_SCHEMA_VERSION,
    NODE_FEATURE_DIM,
    TREE_FEATURE_DIM,
    MilpInstance,
    TgbError,
    baseline_policy_names,
    brute_force_solve,
    chi2_survival,
    composite_score,
    friedman,
    generate_instance,
    make_report,
    parse_instance,
    parse_mps,
    serialize_instance,
    sgm,
    sgm_nodes,
    sgm_pdi,
    solve,
    wilcoxon_signed_rank,
)

__all__ = [
    "CANDIDATE_FEATURE_DIM",
    "FEATURE_SCHEMA_VERSION",
    "NODE_FEATURE_DIM",
    "TREE_FEATURE_DIM",
    "MilpInstance",
    "TgbError",
    "baseline_policy_names",
    "brute_force_solve",
    "chi2_survival",
    "composite_score",
    "friedman",
    "generate_instance",
    "make_report",
    "parse_instance",
    "parse_mps",
    "serialize_instance",
    "sgm",
    "sgm_nodes",
    "sgm_pdi",
    "solve",
    "wilcoxon_signed_rank",
]
