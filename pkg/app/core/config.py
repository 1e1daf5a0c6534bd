from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="MLOOM_", extra="ignore")

    # paths
    config_root: str = Field("./config")

    # parallel DCG builds; the CLI --workers flag wins over this
    workers: int = Field(default=1, ge=1, validation_alias=AliasChoices("MLOOM_WORKERS", "WORKERS"))

    # size guards (number of points 2n)
    tree_max_points: int = 16
    path_max_points: int = 12  # also caterpillar / one-legged caterpillar
    oracle_max_points: int = 12

    # randomized checks
    random_seed: int = 2024
    random_pairs: int = 1000

    # finished jobs whose status and result stay queryable; older ones are forgotten
    job_history: int = Field(default=200, ge=1)

    debug_logging: bool = False


APP_VERSION = "0.1.0"

settings = Settings()
