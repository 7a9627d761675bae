# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
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
# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
import datetime
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Optional, TypeVar

from camel.logger import get_logger
from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field
from tqdm import tqdm

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

MONEY_DECIMALS = 4
TOLERANCE = 1e-9


def money(value: float) -> float:
    r"""Quantize a money amount to the fixed I/O scale."""
    return round(float(value), MONEY_DECIMALS)


def format_money(value: float) -> str:
    return f"{value:.{MONEY_DECIMALS}f}"


class Settings(BaseModel):
    r"""Runtime defaults read from the environment (and a ``.env`` file).

    Args:
        log_level (str): Level name for the root logger.
            (default: :obj:`"INFO"`)
        log_dir (str): Directory receiving dated log files.
            (default: :obj:`"logs"`)
        workers (int): Worker threads for parallel sections.
            (default: :obj:`1`)
        work_limit (int): Subset limit of the exact SOP solver.
            (default: :obj:`10000`)
        time_limit (float, optional): Wall-clock limit of the exact
            ISPO search in seconds. (default: :obj:`None`)
    """

    log_level: str = "INFO"
    log_dir: str = "logs"
    workers: int = Field(default=1, ge=1)
    work_limit: int = Field(default=10_000, ge=1)
    time_limit: Optional[float] = Field(default=None, gt=0)


def load_settings(env_file: Optional[str] = None) -> Settings:
    r"""Load :class:`Settings` from ``ISPO_*`` environment variables.

    Args:
        env_file (str, optional): Explicit dotenv file. When omitted the
            nearest ``.env`` is used if present. (default: :obj:`None`)

    Returns:
        Settings: The resolved settings.
    """
    load_dotenv(env_file or find_dotenv(usecwd=True), override=False)
    values = {}
    for field in Settings.model_fields:
        raw = os.environ.get(f"ISPO_{field.upper()}")
        if raw not in (None, ""):
            values[field] = raw
    return Settings(**values)


def setup_logging(
    log_dir: Optional[str] = None, level: str = "INFO"
) -> Optional[str]:
    r"""Send log records to a dated file and to the console.

    Args:
        log_dir (str, optional): Directory of the log file. No file handler
            is installed when omitted. (default: :obj:`None`)
        level (str): Level name. (default: :obj:`"INFO"`)

    Returns:
        Optional[str]: Path of the log file, if one was opened.
    """
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    root_logger.setLevel(level.upper())

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    log_file = None
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        current_date = datetime.datetime.now().strftime("%Y-%m-%d")
        log_file = str(Path(log_dir) / f"ispo_{current_date}.log")
        file_handler = logging.FileHandler(log_file, encoding="utf-8", mode="a")
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logger.info(f"Logging initialized at level {level.upper()}")
    return log_file


def ordered_map(
    func: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    progress: bool = False,
    desc: Optional[str] = None,
) -> List[R]:
    r"""Apply ``func`` to every item, optionally on a thread pool.

    Results are returned in input order regardless of completion order.

    Args:
        func (Callable): Function applied to each item.
        items (Iterable): Work items.
        workers (int): Number of threads; ``1`` runs inline.
            (default: :obj:`1`)
        progress (bool): Show a tqdm progress bar. (default: :obj:`False`)
        desc (str, optional): Progress bar label. (default: :obj:`None`)

    Returns:
        List: One result per item.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [
            func(item)
            for item in tqdm(items, desc=desc, disable=not progress)
        ]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(
            tqdm(
                executor.map(func, items),
                total=len(items),
                desc=desc,
                disable=not progress,
            )
        )
