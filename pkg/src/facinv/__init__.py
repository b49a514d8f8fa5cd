"""facinv: facies inversion with a generative geological prior.

The package splits into five parts:

* :mod:`facinv.grid`       dense 3-D grids, wells, and file formats
* :mod:`facinv.generator`  generator-network runtime and FACGEN weights
* :mod:`facinv.forward`    elastic mapping and post-stack seismic synthesis
* :mod:`facinv.geostats`   variogram / connectivity QA against a training image
* :mod:`facinv.inversion`  parallel Metropolis chains and posterior statistics
"""

from .generator import (
    GeneratorNetwork,
    LatentVector,
    TransposedConvLayer,
    binarize,
    conv_transpose3d,
    generate,
    leaky_relu,
    load_generator,
    random_latent,
    save_generator,
)
from .forward import (
    ElasticModel,
    FaciesProperties,
    FaciesPropertyTable,
    SeismicCube,
    Wavelet,
    default_property_table,
    facies_to_elastic,
    forward_model,
    reflectivity,
    ricker,
    synthesize,
)
from .geostats import (
    Envelope,
    QaConfig,
    QaReport,
    StatCurve,
    connectivity_function,
    ensemble_envelope,
    indicator_variogram,
    label_components,
    qa_report,
)
from .grid import (
    CHANNEL,
    MUD,
    FaciesGrid,
    GridDims,
    RealGrid,
    Well,
    WellSet,
    extract_patch,
    facies_proportions,
    load_grid,
    load_wells,
    save_grid,
    save_wells,
)
from .inversion import (
    ChainResult,
    ChainSample,
    ChainState,
    InversionProblem,
    LikelihoodSpec,
    PosteriorStats,
    conditioning_accuracy,
    log_likelihood_seismic,
    log_likelihood_wells,
    metropolis_step,
    posterior_stats,
    propose,
    run_chain,
    run_inversion,
)

__version__ = "0.1.0"
