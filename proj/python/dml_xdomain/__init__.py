# Copyright 2026 The dml-xdomain Authors.
#
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

"""Cross-domain recommendation with a learned orthogonal user mapping."""

from ._core import (
    DmlError,
    Domain,
    DomainDataset,
    EpochRecord,
    FeatureMode,
    OverlapRegistry,
    Preset,
    RatingRecord,
    SyntheticConfig,
    SyntheticPair,
    TrainConfig,
    TrainerState,
    alignment_loss,
    compose_mappings,
    coupled_nmf_instance,
    generate_synthetic_pair,
    holdout_run,
    improvement_pct,
    mae,
    map_forward,
    map_inverse,
    min_overlap_required,
    orthogonality_defect,
    paired_t_test,
    procrustes_oracle,
    rmse,
    run_dual_nmf,
    sparse_preset,
    train,
    update_mapping,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
