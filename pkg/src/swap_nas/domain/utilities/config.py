from decouple import config
from pydantic_settings import BaseSettings


def _int_list(value: str) -> list[int]:
    return [int(s.strip()) for s in str(value).split(",") if s.strip()]


class Settings(BaseSettings):
    # Environment
    IS_PROD: bool = config("IS_PROD", default=False, cast=bool)
    LOG_LEVEL: str = config("LOG_LEVEL", default="INFO")

    # Reproducibility
    SWAP_SEED: int = config("SWAP_SEED", default=0, cast=int)
    INIT_SEED: int = config("INIT_SEED", default=0, cast=int)

    # Forward engine
    ENGINE_PRECISION: str = config("ENGINE_PRECISION", default="float32")  # float32 | float64
    NORM_MODE: str = config("NORM_MODE", default="batch")  # batch | none
    TORCH_THREADS: int = config("TORCH_THREADS", default=1, cast=int)
    SCORING_THREADS: int = config("SCORING_THREADS", default=1, cast=int)
    NUM_CLASSES: int = config("NUM_CLASSES", default=10, cast=int)

    # Default inputs
    IMAGE_DIMS: list = config("IMAGE_DIMS", default="3,32,32", cast=_int_list)
    BATCH_SIZE: int = config("BATCH_SIZE", default=8, cast=int)
    BATCH_KIND: str = config("BATCH_KIND", default="image")

    # Regularisation
    THETA_SCALE: float = config("THETA_SCALE", default=1e6, cast=float)  # Theta_M = Theta / THETA_SCALE
    SIGMA_MIN: float = config("SIGMA_MIN", default=1e-3, cast=float)
    REG_MODE: str = config("REG_MODE", default="static")
    REG_MU: float = config("REG_MU", default=1.0, cast=float)
    REG_SIGMA: float = config("REG_SIGMA", default=1.0, cast=float)

    # Cell spaces
    STEM_CHANNELS: int = config("STEM_CHANNELS", default=8, cast=int)
    STACK_DEPTH: int = config("STACK_DEPTH", default=2, cast=int)
    NB201_NODES: int = config("NB201_NODES", default=3, cast=int)
    DARTS_NODES: int = config("DARTS_NODES", default=4, cast=int)

    # Conv chain space
    CHAIN_MAX_LAYERS: int = config("CHAIN_MAX_LAYERS", default=4, cast=int)
    CHAIN_CHANNELS: list = config("CHAIN_CHANNELS", default="4,8,16,32", cast=_int_list)
    CHAIN_KERNELS: list = config("CHAIN_KERNELS", default="1,3,5", cast=_int_list)
    CHAIN_STRIDES: list = config("CHAIN_STRIDES", default="1,2", cast=_int_list)

    # Transformer space
    TFORM_LAYERS: list = config("TFORM_LAYERS", default="1,2,3,4", cast=_int_list)
    TFORM_HEADS: list = config("TFORM_HEADS", default="1,2,4,8", cast=_int_list)
    TFORM_D_MODEL: list = config("TFORM_D_MODEL", default="32,64,128,256", cast=_int_list)
    TFORM_D_FF: list = config("TFORM_D_FF", default="64,128,256,512,1024", cast=_int_list)
    TFORM_SEQ_LEN: int = config("TFORM_SEQ_LEN", default=16, cast=int)
    TFORM_VOCAB: int = config("TFORM_VOCAB", default=1000, cast=int)

    # Search
    POPULATION_SIZE: int = config("POPULATION_SIZE", default=10, cast=int)
    CYCLES: int = config("CYCLES", default=20, cast=int)
    MUTATION_TIMES: int = config("MUTATION_TIMES", default=5, cast=int)
    CROSSOVER_PROB: float = config("CROSSOVER_PROB", default=0.5, cast=float)
    SCORING_RETRIES: int = config("SCORING_RETRIES", default=2, cast=int)

    # Outputs
    OUTPUT_DIR: str = config("OUTPUT_DIR", default="runs")

    class Config:
        env_file = ".env"
        case_sensitive = True


# Create settings instance
settings = Settings()
