# Copyright 2026 The Tuneplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Search spaces shipped with tuneplan."""

from typing import List

from tuneplan.space.constraints import ConstraintExpr
from tuneplan.space.parameters import ParameterSpec, RoutineDecl, divisors
from tuneplan.space.search_space import SearchSpace

SYNTHETIC_GROUPS = ("G1", "G2", "G3", "G4")
SYNTHETIC_BOUND = 50.0

RT_TDDFT_KERNELS = ("VEC", "ZCOPY", "PAIR", "DSCAL", "ZVEC")
# kernel -> (owner routine, further routines calling it)
_KERNEL_ROUTINES = {
    "VEC": ("group1", ()),
    "ZCOPY": ("group1", ("group3",)),
    "PAIR": ("group2", ()),
    "DSCAL": ("group3", ()),
    "ZVEC": ("group3", ()),
}


def synthetic_space() -> SearchSpace:
    """The 20-variable space of the synthetic benchmark.

    x_0..x_4 belong to G1, x_5..x_9 to G2, x_10..x_14 to G3 and x_15..x_19 to
    G4. Each variable is a real in [-50, 50] with default 1 and, being a
    single variable, must take one value wherever it is used.
    """
    params = [
        ParameterSpec.real(
            f"x_{i}",
            -SYNTHETIC_BOUND,
            SYNTHETIC_BOUND,
            default=1.0,
            owner=SYNTHETIC_GROUPS[i // 5],
            shared_value_required=True,
        )
        for i in range(20)
    ]
    return SearchSpace(
        parameters=tuple(params),
        routines=tuple(RoutineDecl(g) for g in SYNTHETIC_GROUPS),
    )


def rt_tddft_space(
    cores: int = 40, max_threads_per_sm: int = 2048, bands: int = 64
) -> SearchSpace:
    """The 20-parameter GPU RT-TDDFT space.

    Routines: `app` (no metric of its own, tuned against the total), the
    `slater` determinant region inside it, and kernel groups `group1`..`group3`
    inside `slater`. The ZCOPY kernel is called from group1 and group3 and
    must use one set of launch parameters.

    Args:
        cores: allocated cores; nstb * nkpb * nspb may not exceed it.
        max_threads_per_sm: threadblock size times threadblocks per SM may not
            exceed it for any kernel.
        bands: electron bands; nstb only takes divisors of it.
    """
    routines = (
        RoutineDecl("app", measured=False),
        RoutineDecl("slater", parent="app"),
        RoutineDecl("group1", parent="slater"),
        RoutineDecl("group2", parent="slater"),
        RoutineDecl("group3", parent="slater"),
    )
    params: List[ParameterSpec] = [
        ParameterSpec.ordinal("nstb", divisors(bands), default=4, owner="app"),
        ParameterSpec.ordinal("nkpb", (1, 2, 4), default=1, owner="app"),
        ParameterSpec.ordinal("nspb", (1, 2), default=1, owner="app"),
    ]
    constraints = [ConstraintExpr(f"nstb * nkpb * nspb <= {cores}")]
    for kernel in RT_TDDFT_KERNELS:
        owner, users = _KERNEL_ROUTINES[kernel]
        shared = dict(owner=owner, users=users, shared_value_required=True)
        params.append(
            ParameterSpec.ordinal(f"u_{kernel}", (1, 2, 4, 8), default=1, **shared)
        )
        params.append(
            ParameterSpec.integer(
                f"tb_{kernel}", 32, 1024, step=32, default=64, **shared
            )
        )
        params.append(
            ParameterSpec.integer(f"tb_sm_{kernel}", 1, 32, default=1, **shared)
        )
        constraints.append(
            ConstraintExpr(f"tb_{kernel} * tb_sm_{kernel} <= {max_threads_per_sm}")
        )
    params.append(
        ParameterSpec.integer(
            "nbatches", 1, 32, default=1, owner="slater", shared_value_required=True
        )
    )
    params.append(
        ParameterSpec.integer(
            "nstreams", 1, 32, default=1, owner="slater", shared_value_required=True
        )
    )
    return SearchSpace(
        parameters=tuple(params), routines=routines, constraints=tuple(constraints)
    )
