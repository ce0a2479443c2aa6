from abc import ABC, abstractmethod
from typing import Generic, TypeVar

T = TypeVar('T')


class IRepository(ABC, Generic[T]):
    """Generic file-backed repository interface"""

    @abstractmethod
    def load(self, path: str) -> T:
        """
        Read entity from a file

        Args:
            path: Source file

        Returns:
            Entity

        Raises:
            StorageError: If the file is unreadable or malformed
        """
        pass

    @abstractmethod
    def save(self, entity: T, path: str) -> str:
        """
        Write entity to a file, replacing it atomically

        Args:
            entity: Entity to write
            path: Target file

        Returns:
            Path written
        """
        pass
