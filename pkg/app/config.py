from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv
from typing import Optional

load_dotenv()

class Settings(BaseSettings):
    # Logging
    log_level: str = "INFO"
    log_dir: str = "logs"
    log_to_file: bool = True

    # Numerics
    debug_numerics: bool = False  # NaN/Inf sentinel after every tensor op
    ignore_label: int = 255

    # Verification
    verify_fault: Optional[str] = None  # suite name to sabotage (test builds only)

    # Evaluation
    eval_workers: int = 1

    model_config = SettingsConfigDict(
        env_prefix="DFDAM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
