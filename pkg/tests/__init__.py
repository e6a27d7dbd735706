"""Unit tests for qsdc_lab"""
