"""
サービス層パッケージ

- connection_service: 計量・部分空間・接続
- homogeneous_service: 等質空間の射影・作用・水平分解
- dynamics_service: 運動方程式の右辺と RKMK4 積分
- virtual_constraint_service: 仮想非ホロノミック拘束の制御則
- scenario_service: シナリオ構築
- verification_service: 性質検証
- simulation_service / export_service: 実行と結果出力

数値計算のロジックを担当
"""
