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
from typing import List

import pytest

from ispo.model import GeneratorConfig, Instance, generate_instance


def tiny_instances(count: int, start: int = 0) -> List[Instance]:
    config = GeneratorConfig.tiny()
    return [generate_instance(config, seed) for seed in range(start, start + count)]


@pytest.fixture(scope="session")
def tiny1() -> Instance:
    return generate_instance(GeneratorConfig.tiny(), 0)


@pytest.fixture
def tiny_document(tiny1):
    return tiny1.to_document()


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("ISPO_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("ISPO_LOG_LEVEL", "WARNING")
    return tmp_path
