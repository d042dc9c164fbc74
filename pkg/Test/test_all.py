"""
Project structure tests for the idrkit toolkit.
"""

import sys
import unittest
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))


class TestProjectStructure(unittest.TestCase):
    """Tests for the overall project layout"""

    def test_package_directories_exist(self):
        for dir_name in ("Corpus", "Journals", "Metrics", "Network", "Test", "fixtures"):
            dir_path = ROOT_DIR / dir_name
            self.assertTrue(dir_path.is_dir(), f"Directory {dir_name} should exist")

    def test_essential_files_exist(self):
        essential_files = [
            "main.py",
            "config.py",
            "pipeline.py",
            "errors.py",
            "run_log.py",
            "run_report.py",
            "synthetic_corpus.py",
            "idrkit_config.json",
            "requirements.txt",
            "README.md",
            "INPUT_SCHEMA.md",
            "fixtures/corpus.jsonl",
            "fixtures/catalog.csv",
            "fixtures/abbreviations.csv",
            "fixtures/fixture_config.json",
        ]
        for filename in essential_files:
            self.assertTrue((ROOT_DIR / filename).is_file(), f"File {filename} should exist")

    def test_test_directory_structure(self):
        test_dir = ROOT_DIR / "Test"
        self.assertTrue((test_dir / "__init__.py").exists())
        test_files = sorted(p.name for p in test_dir.glob("test_*.py"))
        self.assertGreaterEqual(len(test_files), 10)

    def test_requirements(self):
        text = (ROOT_DIR / "requirements.txt").read_text(encoding="utf-8")
        for package in ("numpy", "pandas", "networkx", "python-dotenv"):
            self.assertIn(package, text)

    def test_fixture_corpus_size(self):
        lines = (ROOT_DIR / "fixtures" / "corpus.jsonl").read_text(encoding="utf-8").splitlines()
        self.assertGreaterEqual(len([line for line in lines if line.strip()]), 200)


if __name__ == "__main__":
    unittest.main()
