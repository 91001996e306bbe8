"""Модуль сохранения артефактов."""

from async_election.output.directory_builder import DirectoryBuilder
from async_election.output.file_manager import FileManager

__all__ = ["DirectoryBuilder", "FileManager"]
