"""Cantor-Schroeder-Bernstein for finite groupoids, made computational.

The package decides the embedding criteria for functors between finite
groupoids, runs the classical construction on a pair of embeddings,
certifies the resulting equivalence, and, for rule-presented countable
families where an image can be a proper subset, traces the backward
chains whose taxonomy drives the construction's case split.
"""

from .catalog import (
    GeneratorParams,
    NamedExample,
    build,
    catalog_names,
    named_example,
    random_embedding_pair,
    random_functor,
    random_groupoid,
    verify_named,
)
from .countable import (
    ChainVerdict,
    CountableFamily,
    CountableMap,
    CountableProblem,
    IndexMap,
    backward_chain,
    compose_index_maps,
    construct_h_window,
    decompose_window,
    embedding_status_countable,
    families_equivalent,
    is_g_point_countable,
    validate_countable,
)
from .csb import (
    CsbCertificate,
    CsbProblem,
    class_map,
    construct_h,
    g_inverse_witness,
    is_g_point,
    split_surjection_witness,
    verify_csb,
)
from .errors import (
    AmbiguousPredecessorError,
    CertificateFalsificationError,
    ConstructionError,
    CsbError,
    HypothesisError,
    PreconditionError,
    SchemaError,
    StructuralError,
)
from .functors import (
    Functor,
    NaturalIso,
    check_natural_iso,
    compose_functors,
    fiber_groupoid,
    identity_functor,
    is_embedding_fiberwise,
    is_embedding_homwise,
    is_equivalence,
    is_left_cancellable,
    validate_functor,
)
from .groupoid import (
    Groupoid,
    IsoClassPartition,
    aut_group,
    groupoids_equivalent,
    hom_set,
    is_connected,
    is_proposition_groupoid,
    iso_classes,
    validate_groupoid,
)
from .groups import FiniteGroup, groups_isomorphic, validate_group

__version__ = "0.1.0"
