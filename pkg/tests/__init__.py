import pytest